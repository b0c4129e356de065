//! Dataset ingestion: scan the two-class image directory, deduplicate by
//! pixel content, preprocess to model-ready tensors, and produce
//! reproducible stratified train/validation/test splits.

pub mod preprocess;
pub mod synthetic;

pub use preprocess::{preprocess, preprocess_file, ChannelPolicy, Crop, PreprocessConfig};

use crate::error::{Error, Result};
use crate::Scalar;
use ndarray::Array3;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

/// Binary class label; `Infected` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Infected,
    Notinfected,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Infected => "infected",
            Label::Notinfected => "notinfected",
        }
    }

    /// Label encoded as the probability of class `infected`.
    pub fn as_scalar<F: Scalar>(&self) -> F {
        match self {
            Label::Infected => F::one(),
            Label::Notinfected => F::zero(),
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Split assignment of one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// One decodable image in the dataset. `id` is a content hash over the
/// decoded RGB pixels, so byte-identical and re-encoded duplicates share it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: String,
    pub source_path: PathBuf,
    pub label: Label,
    pub width: u32,
    pub height: u32,
    pub channels: u8,
}

/// A file that could not be ingested, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub reason: String,
}

/// Catalog of all ingested frames plus their split assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    pub records: Vec<ImageRecord>,
    pub skipped: Vec<SkippedFile>,
    pub split_assignment: BTreeMap<String, Split>,
}

impl DatasetManifest {
    pub fn class_counts(&self) -> BTreeMap<Label, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.records {
            *counts.entry(r.label).or_insert(0) += 1;
        }
        counts
    }

    pub fn records_in(&self, split: Split) -> Vec<&ImageRecord> {
        self.records
            .iter()
            .filter(|r| self.split_assignment.get(&r.id) == Some(&split))
            .collect()
    }
}

/// Fractions of the stratified split. Fractions must sum to 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub stratified: bool,
}

fn default_true() -> bool {
    true
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            val_fraction: 0.1,
            test_fraction: 0.1,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fractions = [self.train_fraction, self.val_fraction, self.test_fraction];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::Parameter(
                "split fractions must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

const IMAGE_EXTENSIONS: [&str; 3] = ["jpg", "jpeg", "png"];

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

/// Content hash over decoded pixels: dimensions plus RGB8 bytes.
fn content_id(img: &image::DynamicImage) -> String {
    let rgb = img.to_rgb8();
    let mut hasher = Sha256::new();
    hasher.update(rgb.width().to_le_bytes());
    hasher.update(rgb.height().to_le_bytes());
    hasher.update(rgb.as_raw());
    hex::encode(hasher.finalize())
}

fn channel_count(img: &image::DynamicImage) -> u8 {
    img.color().channel_count()
}

fn ingest_file(path: &Path, label: Label) -> std::result::Result<ImageRecord, SkippedFile> {
    match image::open(path) {
        Ok(img) => Ok(ImageRecord {
            id: content_id(&img),
            source_path: path.to_path_buf(),
            label,
            width: img.width(),
            height: img.height(),
            channels: channel_count(&img),
        }),
        Err(e) => Err(SkippedFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }),
    }
}

/// Scan `<root>/infected` and `<root>/notinfected` into a manifest.
///
/// Records are ordered by (label, path) so repeated scans of unchanged data
/// serialize byte-identically. Undecodable image files land in the skip
/// list rather than being dropped silently.
pub fn scan_dataset(root: &Path) -> Result<DatasetManifest> {
    scan_dataset_with(root, true)
}

/// `scan_dataset` with explicit worker control; `parallel = false` pins
/// everything to the calling thread. Both modes produce identical manifests.
pub fn scan_dataset_with(root: &Path, parallel: bool) -> Result<DatasetManifest> {
    if !root.is_dir() {
        return Err(Error::Layout(format!(
            "dataset root {} does not exist; expected <root>/infected and <root>/notinfected",
            root.display()
        )));
    }

    let mut work: Vec<(PathBuf, Label)> = Vec::new();
    for (dir_name, label) in [("infected", Label::Infected), ("notinfected", Label::Notinfected)] {
        let class_dir = root.join(dir_name);
        if !class_dir.is_dir() {
            return Err(Error::Layout(format!(
                "missing class directory {}; expected layout <root>/infected/*.{{jpg,png}} and <root>/notinfected/*.{{jpg,png}}",
                class_dir.display()
            )));
        }
        for entry in walkdir::WalkDir::new(&class_dir)
            .sort_by_file_name()
            .into_iter()
            .filter_map(|e| e.ok())
        {
            if entry.file_type().is_file() && has_image_extension(entry.path()) {
                work.push((entry.path().to_path_buf(), label));
            }
        }
    }
    work.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));

    let outcomes: Vec<std::result::Result<ImageRecord, SkippedFile>> = if parallel {
        work.par_iter().map(|(p, l)| ingest_file(p, *l)).collect()
    } else {
        work.iter().map(|(p, l)| ingest_file(p, *l)).collect()
    };

    let mut manifest = DatasetManifest::default();
    for outcome in outcomes {
        match outcome {
            Ok(record) => manifest.records.push(record),
            Err(skip) => manifest.skipped.push(skip),
        }
    }

    if manifest.records.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no decodable images under {}",
            root.display()
        )));
    }
    Ok(manifest)
}

/// Outcome of [`dedup`]: the filtered manifest plus the number removed.
#[derive(Debug, Clone)]
pub struct DedupOutcome {
    pub manifest: DatasetManifest,
    pub removed: usize,
}

/// Keep the first record per content id, preserving order. Idempotent.
pub fn dedup(manifest: &DatasetManifest) -> Result<DedupOutcome> {
    if manifest.records.is_empty() {
        return Err(Error::EmptyDataset("dedup requires at least one record".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut survivors = Vec::with_capacity(manifest.records.len());
    for record in &manifest.records {
        if seen.insert(record.id.clone()) {
            survivors.push(record.clone());
        }
    }
    let removed = manifest.records.len() - survivors.len();
    let split_assignment = manifest
        .split_assignment
        .iter()
        .filter(|(id, _)| seen.contains(*id))
        .map(|(id, s)| (id.clone(), *s))
        .collect();
    Ok(DedupOutcome {
        manifest: DatasetManifest {
            records: survivors,
            skipped: manifest.skipped.clone(),
            split_assignment,
        },
        removed,
    })
}

/// Allocate `n` items over the three splits by largest remainder, so every
/// allocation differs from `fraction * n` by strictly less than one.
fn allocate(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut base: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = base.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    // ties broken by split order (train, val, test)
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).expect("finite").then(a.cmp(&b))
    });
    for &idx in order.iter().take(n - assigned) {
        base[idx] += 1;
    }
    [base[0], base[1], base[2]]
}

/// Assign every record to exactly one split, stratified per class.
///
/// Deterministic for a fixed seed: per-class record order is shuffled with a
/// seeded generator and partitioned by explicit counts.
pub fn split(manifest: &DatasetManifest, spec: &SplitSpec) -> Result<DatasetManifest> {
    spec.validate()?;
    if manifest.records.is_empty() {
        return Err(Error::EmptyDataset("split requires a non-empty manifest".into()));
    }

    let fractions = [spec.train_fraction, spec.val_fraction, spec.test_fraction];
    let positive_splits: Vec<usize> = (0..3).filter(|&i| fractions[i] > 0.0).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut assignment: BTreeMap<String, Split> = BTreeMap::new();

    let groups: Vec<(Option<Label>, Vec<&ImageRecord>)> = if spec.stratified {
        [Label::Infected, Label::Notinfected]
            .into_iter()
            .map(|label| {
                (
                    Some(label),
                    manifest
                        .records
                        .iter()
                        .filter(|r| r.label == label)
                        .collect::<Vec<_>>(),
                )
            })
            .filter(|(_, v)| !v.is_empty())
            .collect()
    } else {
        vec![(None, manifest.records.iter().collect())]
    };

    for (label, group) in groups {
        let mut ids: Vec<&str> = group.iter().map(|r| r.id.as_str()).collect();
        ids.shuffle(&mut rng);
        let counts = allocate(ids.len(), fractions);
        for (i, &count) in counts.iter().enumerate() {
            if fractions[i] > 0.0 && count == 0 {
                let class = label.map(|l| l.as_str()).unwrap_or("dataset");
                return Err(Error::InfeasibleSplit(format!(
                    "class {class} has {} records, too few to give the {} split at least one",
                    ids.len(),
                    Split::ALL[i].as_str()
                )));
            }
        }
        let _ = &positive_splits;
        let mut cursor = 0;
        for (i, &count) in counts.iter().enumerate() {
            for id in &ids[cursor..cursor + count] {
                assignment.insert((*id).to_string(), Split::ALL[i]);
            }
            cursor += count;
        }
    }

    Ok(DatasetManifest {
        records: manifest.records.clone(),
        skipped: manifest.skipped.clone(),
        split_assignment: assignment,
    })
}

/// One serialized manifest line; field order is fixed for reproducibility.
#[derive(Serialize, Deserialize)]
struct ManifestLine {
    id: String,
    path: String,
    label: Label,
    split: Option<Split>,
    width: u32,
    height: u32,
    channels: u8,
}

/// Render the manifest as line-delimited JSON records.
pub fn manifest_to_jsonl(manifest: &DatasetManifest) -> String {
    let mut out = String::new();
    for r in &manifest.records {
        let line = ManifestLine {
            id: r.id.clone(),
            path: r.source_path.display().to_string(),
            label: r.label,
            split: manifest.split_assignment.get(&r.id).copied(),
            width: r.width,
            height: r.height,
            channels: r.channels,
        };
        out.push_str(&serde_json::to_string(&line).expect("manifest line serializes"));
        out.push('\n');
    }
    out
}

pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(manifest_to_jsonl(manifest).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut manifest = DatasetManifest::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ManifestLine = serde_json::from_str(&line).map_err(|e| {
            Error::Input(format!("manifest {} line {}: {e}", path.display(), idx + 1))
        })?;
        if let Some(split) = parsed.split {
            manifest.split_assignment.insert(parsed.id.clone(), split);
        }
        manifest.records.push(ImageRecord {
            id: parsed.id,
            source_path: PathBuf::from(parsed.path),
            label: parsed.label,
            width: parsed.width,
            height: parsed.height,
            channels: parsed.channels,
        });
    }
    Ok(manifest)
}

/// A preprocessed, labeled sample ready for training or evaluation.
#[derive(Debug, Clone)]
pub struct Sample<F: Scalar> {
    pub id: String,
    pub image: Array3<F>,
    /// Probability of class `infected`: 1 for infected, 0 for notinfected.
    pub label: F,
}

/// Decode and preprocess every record assigned to `split`, in manifest order.
pub fn load_split_samples<F: Scalar>(
    manifest: &DatasetManifest,
    split_name: Split,
    cfg: &PreprocessConfig,
) -> Result<Vec<Sample<F>>> {
    manifest
        .records_in(split_name)
        .into_iter()
        .map(|r| {
            Ok(Sample {
                id: r.id.clone(),
                image: preprocess_file::<F>(&r.source_path, cfg)?,
                label: r.label.as_scalar(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgb, RgbImage};

    fn write_png(path: &Path, w: u32, h: u32, color: [u8; 3]) {
        let img = RgbImage::from_pixel(w, h, Rgb(color));
        img.save(path).unwrap();
    }

    fn toy_root(dir: &Path) {
        std::fs::create_dir_all(dir.join("infected")).unwrap();
        std::fs::create_dir_all(dir.join("notinfected")).unwrap();
        write_png(&dir.join("infected/a.png"), 12, 10, [200, 10, 10]);
        write_png(&dir.join("infected/b.png"), 8, 8, [180, 20, 20]);
        write_png(&dir.join("notinfected/c.png"), 9, 9, [10, 10, 200]);
        write_png(&dir.join("notinfected/d.png"), 10, 10, [20, 20, 180]);
        write_png(&dir.join("notinfected/e.png"), 11, 11, [30, 30, 160]);
    }

    #[test]
    fn scan_counts_classes() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        let manifest = scan_dataset(dir.path()).unwrap();
        let counts = manifest.class_counts();
        assert_eq!(counts[&Label::Infected], 2);
        assert_eq!(counts[&Label::Notinfected], 3);
        assert!(manifest.skipped.is_empty());
    }

    #[test]
    fn scan_missing_class_dir_names_layout() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("infected")).unwrap();
        let err = scan_dataset(dir.path()).unwrap_err();
        match err {
            Error::Layout(msg) => assert!(msg.contains("notinfected")),
            other => panic!("expected layout error, got {other}"),
        }
    }

    #[test]
    fn scan_empty_dataset_errors() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("infected")).unwrap();
        std::fs::create_dir_all(dir.path().join("notinfected")).unwrap();
        assert!(matches!(
            scan_dataset(dir.path()).unwrap_err(),
            Error::EmptyDataset(_)
        ));
    }

    #[test]
    fn scan_records_undecodable_files_in_skip_list() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        std::fs::write(dir.path().join("infected/broken.png"), b"not a png").unwrap();
        let manifest = scan_dataset(dir.path()).unwrap();
        assert_eq!(manifest.skipped.len(), 1);
        assert!(manifest.skipped[0].path.ends_with("broken.png"));
        assert_eq!(manifest.records.len(), 5);
    }

    #[test]
    fn scan_parallel_and_sequential_agree() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        let a = scan_dataset_with(dir.path(), true).unwrap();
        let b = scan_dataset_with(dir.path(), false).unwrap();
        assert_eq!(manifest_to_jsonl(&a), manifest_to_jsonl(&b));
    }

    #[test]
    fn byte_identical_files_share_an_id() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        std::fs::copy(dir.path().join("infected/a.png"), dir.path().join("infected/a2.png"))
            .unwrap();
        let manifest = scan_dataset(dir.path()).unwrap();
        let ids: Vec<&str> = manifest
            .records
            .iter()
            .filter(|r| r.label == Label::Infected)
            .map(|r| r.id.as_str())
            .collect();
        assert_eq!(ids.len(), 3);
        assert_eq!(ids.iter().collect::<std::collections::BTreeSet<_>>().len(), 2);
    }

    #[test]
    fn dedup_removes_duplicates_and_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        std::fs::copy(dir.path().join("infected/a.png"), dir.path().join("infected/a2.png"))
            .unwrap();
        let manifest = scan_dataset(dir.path()).unwrap();
        let once = dedup(&manifest).unwrap();
        assert_eq!(once.removed, 1);
        assert_eq!(once.manifest.records.len(), 5);
        let twice = dedup(&once.manifest).unwrap();
        assert_eq!(twice.removed, 0);
        assert_eq!(twice.manifest, once.manifest);
    }

    #[test]
    fn dedup_keeps_first_occurrence_order() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        let manifest = scan_dataset(dir.path()).unwrap();
        let deduped = dedup(&manifest).unwrap();
        assert_eq!(deduped.manifest.records, manifest.records);
    }

    #[test]
    fn split_respects_fractions_exactly_on_balanced_toy() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        // top up to 5/5
        write_png(&dir.path().join("infected/f.png"), 7, 7, [190, 15, 15]);
        write_png(&dir.path().join("infected/g.png"), 6, 6, [170, 25, 25]);
        write_png(&dir.path().join("infected/h.png"), 5, 5, [160, 35, 35]);
        write_png(&dir.path().join("notinfected/i.png"), 12, 12, [40, 40, 150]);
        write_png(&dir.path().join("notinfected/j.png"), 13, 13, [50, 50, 140]);
        let manifest = scan_dataset(dir.path()).unwrap();
        assert_eq!(manifest.records.len(), 10);

        let spec = SplitSpec {
            train_fraction: 0.8,
            val_fraction: 0.0,
            test_fraction: 0.2,
            seed: 3,
            stratified: true,
        };
        let assigned = split(&manifest, &spec).unwrap();
        for label in [Label::Infected, Label::Notinfected] {
            let test_count = assigned
                .records
                .iter()
                .filter(|r| r.label == label)
                .filter(|r| assigned.split_assignment[&r.id] == Split::Test)
                .count();
            assert_eq!(test_count, 1);
        }
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        let manifest = scan_dataset(dir.path()).unwrap();
        let spec = SplitSpec {
            train_fraction: 0.6,
            val_fraction: 0.2,
            test_fraction: 0.2,
            seed: 11,
            stratified: false,
        };
        let a = split(&manifest, &spec).unwrap();
        let b = split(&manifest, &spec).unwrap();
        assert_eq!(a.split_assignment, b.split_assignment);
        assert_eq!(a.split_assignment.len(), manifest.records.len());
    }

    #[test]
    fn split_infeasible_for_tiny_class() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        let manifest = scan_dataset(dir.path()).unwrap();
        // 2 infected records cannot feed three positive splits
        let spec = SplitSpec {
            train_fraction: 0.34,
            val_fraction: 0.33,
            test_fraction: 0.33,
            seed: 1,
            stratified: true,
        };
        assert!(matches!(
            split(&manifest, &spec).unwrap_err(),
            Error::InfeasibleSplit(_)
        ));
    }

    #[test]
    fn split_rejects_bad_fractions() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        let manifest = scan_dataset(dir.path()).unwrap();
        let spec = SplitSpec {
            train_fraction: 0.8,
            val_fraction: 0.1,
            test_fraction: 0.2,
            seed: 1,
            stratified: true,
        };
        assert!(matches!(
            split(&manifest, &spec).unwrap_err(),
            Error::Parameter(_)
        ));
    }

    #[test]
    fn allocate_matches_brute_force_partition() {
        // oracle: partition a shuffled index list by explicit counting and
        // verify every allocation is within one of fraction * n
        for n in [10usize, 37, 100, 384, 3840] {
            let fractions = [0.8, 0.1, 0.1];
            let counts = allocate(n, fractions);
            assert_eq!(counts.iter().sum::<usize>(), n);
            for (i, &c) in counts.iter().enumerate() {
                assert!(
                    (c as f64 - fractions[i] * n as f64).abs() < 1.0,
                    "n={n} split {i} count {c}"
                );
            }
        }
    }

    #[test]
    fn large_stratified_split_preserves_class_ratio() {
        // 3840-record synthetic manifest at the published class skew
        let mut manifest = DatasetManifest::default();
        for i in 0..3840usize {
            let label = if i % 5 < 2 { Label::Infected } else { Label::Notinfected };
            manifest.records.push(ImageRecord {
                id: format!("id{i:05}"),
                source_path: PathBuf::from(format!("img{i}.png")),
                label,
                width: 10,
                height: 10,
                channels: 3,
            });
        }
        let spec = SplitSpec {
            train_fraction: 0.8,
            val_fraction: 0.1,
            test_fraction: 0.1,
            seed: 5,
            stratified: true,
        };
        let assigned = split(&manifest, &spec).unwrap();
        let test_ids: Vec<&ImageRecord> = assigned
            .records
            .iter()
            .filter(|r| assigned.split_assignment[&r.id] == Split::Test)
            .collect();
        // per-class largest-remainder allocation: within one of 384 overall
        assert!((383..=385).contains(&test_ids.len()), "test size {}", test_ids.len());
        let infected = test_ids.iter().filter(|r| r.label == Label::Infected).count();
        // overall infected ratio is 2/5; tolerance 1/test_size per invariant
        let ratio = infected as f64 / test_ids.len() as f64;
        assert!((ratio - 0.4).abs() <= 1.0 / test_ids.len() as f64);

        // splits partition the ids
        let mut seen = std::collections::BTreeSet::new();
        for r in &assigned.records {
            assert!(seen.insert(&r.id));
            assert!(assigned.split_assignment.contains_key(&r.id));
        }
    }

    #[test]
    fn manifest_serialization_round_trips_and_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        toy_root(dir.path());
        let manifest = scan_dataset(dir.path()).unwrap();
        let assigned = split(&manifest, &SplitSpec::default()).unwrap_or(manifest.clone());

        let path = dir.path().join("manifest.jsonl");
        write_manifest(&assigned, &path).unwrap();
        let text1 = std::fs::read_to_string(&path).unwrap();
        write_manifest(&assigned, &path).unwrap();
        let text2 = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text1, text2);

        let parsed = read_manifest(&path).unwrap();
        assert_eq!(parsed.records, assigned.records);
        assert_eq!(parsed.split_assignment, assigned.split_assignment);
    }
}
