//! Dataset ingestion: IDX images, the vowel table, class filtering, splits
//! and preprocessing.

mod cache;
pub mod idx;
pub mod image;
pub mod vowel;

use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{read_cache, write_cache, CACHE_MAGIC};
pub use vowel::Pca;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Mnist2,
    Mnist4,
    Fashion2,
    Fashion4,
    Vowel4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Mnist,
    Fashion,
    Vowel,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::Mnist2,
        Task::Mnist4,
        Task::Fashion2,
        Task::Fashion4,
        Task::Vowel4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Mnist2 => "mnist2",
            Task::Mnist4 => "mnist4",
            Task::Fashion2 => "fashion2",
            Task::Fashion4 => "fashion4",
            Task::Vowel4 => "vowel4",
        }
    }

    pub fn source(self) -> Source {
        match self {
            Task::Mnist2 | Task::Mnist4 => Source::Mnist,
            Task::Fashion2 | Task::Fashion4 => Source::Fashion,
            Task::Vowel4 => Source::Vowel,
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown task `{s}`")))
    }
}

/// Fashion-MNIST label indices.
pub mod fashion {
    pub const TSHIRT: u8 = 0;
    pub const TROUSER: u8 = 1;
    pub const PULLOVER: u8 = 2;
    pub const DRESS: u8 = 3;
    pub const SHIRT: u8 = 6;
}

/// Vowel-context class indices (hid, hId, hEd, hAd, hYd, had, hOd, hod,
/// hUd, hud, hed).
pub mod vowels {
    pub const HID: u8 = 0;
    pub const HID_LAX: u8 = 1;
    pub const HAD: u8 = 5;
    pub const HOD_LAX: u8 = 6;
}

/// Number of principal components kept for the vowel task.
pub const VOWEL_COMPONENTS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub task: Task,
    /// Source labels, in relabelling order.
    pub classes: Vec<u8>,
    pub train_count: usize,
    pub val_count: usize,
    /// Seeds the validation draw.
    pub seed: u64,
}

impl DatasetSpec {
    pub fn preset(task: Task) -> Self {
        let (classes, train_count, val_count) = match task {
            Task::Mnist2 => (vec![3, 6], 500, 300),
            Task::Mnist4 => (vec![0, 1, 2, 3], 100, 300),
            Task::Fashion2 => (vec![fashion::DRESS, fashion::SHIRT], 500, 300),
            Task::Fashion4 => (
                vec![fashion::TSHIRT, fashion::TROUSER, fashion::PULLOVER, fashion::DRESS],
                100,
                300,
            ),
            // The four classes have 360 rows in total.
            Task::Vowel4 => (
                vec![vowels::HID, vowels::HID_LAX, vowels::HAD, vowels::HOD_LAX],
                100,
                260,
            ),
        };
        DatasetSpec {
            task,
            classes,
            train_count,
            val_count,
            seed: 0,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub train: Vec<Sample>,
    pub val: Vec<Sample>,
    pub num_classes: usize,
}

impl Dataset {
    pub fn num_features(&self) -> usize {
        self.train.first().map_or(0, |s| s.features.len())
    }
}

/// Keeps items whose label is in `classes` (original order) and relabels
/// them by position in `classes`.
fn filter_classes<T>(items: impl IntoIterator<Item = (T, usize)>, classes: &[u8]) -> Vec<(T, usize)> {
    items
        .into_iter()
        .filter_map(|(item, label)| {
            classes
                .iter()
                .position(|&c| c as usize == label)
                .map(|k| (item, k))
        })
        .collect()
}

/// Front `train_count` for training, `val_count` drawn without replacement
/// from the rest (kept in pool order).
fn split_indices(pool: usize, spec: &DatasetSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    let needed = spec.train_count + spec.val_count;
    if pool < needed {
        return Err(Error::InsufficientSamples {
            needed,
            available: pool,
        });
    }
    let train: Vec<usize> = (0..spec.train_count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut val: Vec<usize> = index::sample(&mut rng, pool - spec.train_count, spec.val_count)
        .into_iter()
        .map(|i| spec.train_count + i)
        .collect();
    val.sort_unstable();
    Ok((train, val))
}

pub fn load_image_dataset(images: &idx::IdxImages, labels: &[u8], spec: &DatasetSpec) -> Result<Dataset> {
    if images.len() != labels.len() {
        return Err(Error::Idx(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    if (images.rows, images.cols) != (image::SIDE, image::SIDE) {
        return Err(Error::Idx(format!(
            "expected {0}x{0} images, found {1}x{2}",
            image::SIDE,
            images.rows,
            images.cols
        )));
    }
    let filtered = filter_classes(
        (0..images.len()).map(|i| (i, labels[i] as usize)),
        &spec.classes,
    );
    let (train, val) = split_indices(filtered.len(), spec)?;
    let make = |k: usize| -> Result<Sample> {
        let (i, label) = filtered[k];
        Ok(Sample {
            features: image::preprocess(images.image(i))?,
            label,
        })
    };
    Ok(Dataset {
        train: train.into_iter().map(make).collect::<Result<_>>()?,
        val: val.into_iter().map(make).collect::<Result<_>>()?,
        num_classes: spec.num_classes(),
    })
}

/// Splits first, then standardizes and fits PCA on the training rows only.
pub fn load_vowel_dataset(rows: &[vowel::VowelRow], spec: &DatasetSpec) -> Result<(Dataset, Pca)> {
    let filtered = filter_classes(rows.iter().map(|r| (&r.features, r.class)), &spec.classes);
    let (train, val) = split_indices(filtered.len(), spec)?;
    let train_rows: Vec<Vec<f64>> = train.iter().map(|&k| filtered[k].0.clone()).collect();
    let pca = Pca::fit(&train_rows, VOWEL_COMPONENTS)?;
    let make = |k: usize| -> Result<Sample> {
        let (features, label) = filtered[k];
        Ok(Sample {
            features: pca.transform(features)?,
            label,
        })
    };
    let dataset = Dataset {
        train: train.into_iter().map(make).collect::<Result<_>>()?,
        val: val.into_iter().map(make).collect::<Result<_>>()?,
        num_classes: spec.num_classes(),
    };
    Ok((dataset, pca))
}

pub const IMAGES_FILE: &str = "train-images-idx3-ubyte";
pub const LABELS_FILE: &str = "train-labels-idx1-ubyte";
pub const VOWEL_FILE: &str = "vowel-context.data";

/// Files read for `task` under the dataset root.
pub fn source_files(root: &Path, task: Task) -> Vec<PathBuf> {
    match task.source() {
        Source::Mnist => vec![root.join("mnist").join(IMAGES_FILE), root.join("mnist").join(LABELS_FILE)],
        Source::Fashion => vec![root.join("fashion").join(IMAGES_FILE), root.join("fashion").join(LABELS_FILE)],
        Source::Vowel => vec![root.join("vowel").join(VOWEL_FILE)],
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::DatasetIo {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a task from the raw files under `root`.
pub fn load(root: &Path, spec: &DatasetSpec) -> Result<Dataset> {
    let files = source_files(root, spec.task);
    match spec.task.source() {
        Source::Mnist | Source::Fashion => {
            let images = idx::parse_images(&read(&files[0])?)?;
            let labels = idx::parse_labels(&read(&files[1])?)?;
            load_image_dataset(&images, &labels, spec)
        }
        Source::Vowel => {
            let text = String::from_utf8(read(&files[0])?)
                .map_err(|e| Error::Table(format!("not UTF-8: {e}")))?;
            Ok(load_vowel_dataset(&vowel::parse_table(&text)?, spec)?.0)
        }
    }
}

/// Whether every raw file for `task` exists under `root`.
pub fn available(root: &Path, task: Task) -> bool {
    source_files(root, task).iter().all(|p| p.is_file())
}
