//! Dataset directory layout and the phantom dataset writer.
//!
//! ```text
//! root/
//!   frames/000000.pgm ...   one P5 image per frame
//!   masks/000000.pgm ...    optional 0/1/2 label masks, same names
//!   forces.csv              frame_id,force_newton
//!   pairs.csv               moving_id,target_id
//!   truth/pair_0000_d_true.flo, pair_0000_k_true.flo   (phantom only)
//!   manifest.json           (phantom only)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::force::{DeltaForceVariant, ForcePair};
use crate::io::{
    read_flo, read_pgm_image, read_pgm_mask, write_flo, write_pgm_image, write_pgm_mask, PgmDepth,
};
use crate::metrics::LabelMask;
use crate::phantom::{make_scene, render_pair, PhantomConfig};

pub const FLO_CONVENTION: &str =
    "flo (horizontal, vertical) = (dy, dx); dx positive toward the probe (up), dy positive toward increasing column";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameForce {
    pub frame_id: u64,
    pub force_newton: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRow {
    pub moving_id: u64,
    pub target_id: u64,
}

/// Settings for `forcereg phantom`. Every field has a default, so `{}` is a
/// valid config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomDatasetConfig {
    /// Scene template; its seed is replaced per pair.
    pub scene: PhantomConfig,
    pub force_min: f64,
    pub force_max: f64,
    /// Pairs are redrawn until `|f_target - f_moving|` exceeds this.
    pub min_differential: f64,
    /// Variant used to build the ground-truth displacement.
    pub df_variant: DeltaForceVariant,
    /// 8 or 16.
    pub bit_depth: u8,
}

impl Default for PhantomDatasetConfig {
    fn default() -> Self {
        Self {
            scene: PhantomConfig::two_vessels(64, 0),
            force_min: 1.0,
            force_max: 10.0,
            min_differential: 2.0,
            df_variant: DeltaForceVariant::Normalized,
            bit_depth: 16,
        }
    }
}

impl PhantomDatasetConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        if !(self.force_min.is_finite() && self.force_max.is_finite())
            || self.force_min < 0.0
            || self.force_max <= self.force_min
        {
            return Err(Error::InvalidConfig(format!(
                "force range [{}, {}] must be finite, non-negative and non-empty",
                self.force_min, self.force_max
            )));
        }
        if !(self.min_differential >= 0.0
            && self.min_differential < self.force_max - self.force_min)
        {
            return Err(Error::InvalidConfig(format!(
                "min_differential {} must be in [0, force range width)",
                self.min_differential
            )));
        }
        self.depth()?;
        Ok(())
    }

    fn depth(&self) -> Result<PgmDepth> {
        match self.bit_depth {
            8 => Ok(PgmDepth::Eight),
            16 => Ok(PgmDepth::Sixteen),
            other => Err(Error::InvalidConfig(format!(
                "bit_depth must be 8 or 16, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestPair {
    pub pair_id: usize,
    pub moving_id: u64,
    pub target_id: u64,
    pub f_moving: f64,
    pub f_target: f64,
    pub df_true: f64,
    pub scene_seed: u64,
    pub d_true: String,
    pub k_true: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub flo_convention: String,
    pub seed: u64,
    pub n_pairs: usize,
    pub config: PhantomDatasetConfig,
    pub pairs: Vec<ManifestPair>,
}

pub fn frame_name(id: u64) -> String {
    format!("{id:06}.pgm")
}

pub fn truth_names(pair_id: usize) -> (String, String) {
    (
        format!("pair_{pair_id:04}_d_true.flo"),
        format!("pair_{pair_id:04}_k_true.flo"),
    )
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => crate::io::format_err(path, format!("{other:?}")),
    }
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let found: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if found != header {
        return Err(crate::io::format_err(
            path,
            format!(
                "expected header {}, found {}",
                header.join(","),
                found.join(",")
            ),
        ));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

/// Draws `(f_moving, f_target)` uniformly in the configured range, redrawing
/// until the differential clears the threshold.
fn draw_forces(rng: &mut ChaCha8Rng, cfg: &PhantomDatasetConfig) -> Result<ForcePair> {
    loop {
        let f_m = rng.random_range(cfg.force_min..=cfg.force_max);
        let f_t = rng.random_range(cfg.force_min..=cfg.force_max);
        if (f_t - f_m).abs() > cfg.min_differential {
            return ForcePair::new(f_m, f_t);
        }
    }
}

/// Writes a phantom dataset of `n_pairs` independent scenes, two frames
/// each. Output depends only on `(cfg, n_pairs, seed)`.
pub fn write_phantom_dataset(
    cfg: &PhantomDatasetConfig,
    out_dir: &Path,
    n_pairs: usize,
    seed: u64,
) -> Result<Manifest> {
    cfg.validate()?;
    let depth = cfg.depth()?;
    for sub in ["frames", "masks", "truth"] {
        fs::create_dir_all(out_dir.join(sub))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forces = Vec::with_capacity(2 * n_pairs);
    let mut pairs = Vec::with_capacity(n_pairs);
    let mut entries = Vec::with_capacity(n_pairs);

    for pair_id in 0..n_pairs {
        let scene_seed: u64 = rng.random();
        let f = draw_forces(&mut rng, cfg)?;
        let scene = make_scene(&PhantomConfig {
            seed: scene_seed,
            ..cfg.scene.clone()
        })?;
        let rendered = render_pair(&scene, f, cfg.df_variant)?;
        let (moving_id, target_id) = (2 * pair_id as u64, 2 * pair_id as u64 + 1);
        let frames = out_dir.join("frames");
        let masks = out_dir.join("masks");
        write_pgm_image(&frames.join(frame_name(moving_id)), &rendered.moving, depth)?;
        write_pgm_image(&frames.join(frame_name(target_id)), &rendered.target, depth)?;
        write_pgm_mask(&masks.join(frame_name(moving_id)), &rendered.masks_moving)?;
        write_pgm_mask(&masks.join(frame_name(target_id)), &rendered.masks_target)?;
        let (d_name, k_name) = truth_names(pair_id);
        write_flo(&out_dir.join("truth").join(&d_name), &rendered.d_true)?;
        write_flo(
            &out_dir.join("truth").join(&k_name),
            &scene.k_true.clone().into_field(),
        )?;

        forces.push(FrameForce {
            frame_id: moving_id,
            force_newton: f.f_moving,
        });
        forces.push(FrameForce {
            frame_id: target_id,
            force_newton: f.f_target,
        });
        pairs.push(PairRow {
            moving_id,
            target_id,
        });
        entries.push(ManifestPair {
            pair_id,
            moving_id,
            target_id,
            f_moving: f.f_moving,
            f_target: f.f_target,
            df_true: rendered.df_true,
            scene_seed,
            d_true: format!("truth/{d_name}"),
            k_true: format!("truth/{k_name}"),
        });
    }

    write_csv(
        &out_dir.join("forces.csv"),
        &["frame_id", "force_newton"],
        &forces,
    )?;
    write_csv(
        &out_dir.join("pairs.csv"),
        &["moving_id", "target_id"],
        &pairs,
    )?;
    let manifest = Manifest {
        flo_convention: FLO_CONVENTION.to_owned(),
        seed,
        n_pairs,
        config: cfg.clone(),
        pairs: entries,
    };
    let mut text =
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::InvalidInput(e.to_string()))?;
    text.push('\n');
    fs::write(out_dir.join("manifest.json"), text)?;
    Ok(manifest)
}

/// A dataset read back from disk. Frames are indexed by the numeric stem of
/// their file name.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub forces: BTreeMap<u64, f64>,
    pub pairs: Vec<PairRow>,
    frames: BTreeMap<u64, PathBuf>,
}

impl Dataset {
    pub fn open(root: &Path) -> Result<Self> {
        let force_rows: Vec<FrameForce> =
            read_csv(&root.join("forces.csv"), &["frame_id", "force_newton"])?;
        let pairs: Vec<PairRow> = read_csv(&root.join("pairs.csv"), &["moving_id", "target_id"])?;
        let mut forces = BTreeMap::new();
        for row in force_rows {
            if !(row.force_newton.is_finite() && row.force_newton >= 0.0) {
                return Err(crate::io::format_err(
                    &root.join("forces.csv"),
                    format!(
                        "frame {} has invalid force {}",
                        row.frame_id, row.force_newton
                    ),
                ));
            }
            forces.insert(row.frame_id, row.force_newton);
        }
        let mut frames = BTreeMap::new();
        let frames_dir = root.join("frames");
        if frames_dir.is_dir() {
            for entry in fs::read_dir(&frames_dir)? {
                let path = entry?.path();
                let id = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .and_then(|s| s.parse::<u64>().ok());
                if let (Some(id), Some("pgm")) = (id, path.extension().and_then(|e| e.to_str())) {
                    frames.insert(id, path);
                }
            }
        }
        for p in &pairs {
            for id in [p.moving_id, p.target_id] {
                if !frames.contains_key(&id) || !forces.contains_key(&id) {
                    return Err(crate::io::format_err(
                        &root.join("pairs.csv"),
                        format!("frame {id} is missing from frames/ or forces.csv"),
                    ));
                }
            }
        }
        Ok(Self {
            root: root.to_path_buf(),
            forces,
            pairs,
            frames,
        })
    }

    pub fn forces_of(&self, pair: &PairRow) -> Result<ForcePair> {
        ForcePair::new(self.forces[&pair.moving_id], self.forces[&pair.target_id])
    }

    pub fn frame(&self, id: u64) -> Result<ScalarField> {
        read_pgm_image(&self.frames[&id])
    }

    /// Mask for a frame, if `masks/` holds one with the same file name.
    pub fn mask(&self, id: u64) -> Result<Option<LabelMask>> {
        let name = self.frames[&id].file_name().expect("frame path has a name");
        let path = self.root.join("masks").join(name);
        if path.is_file() {
            read_pgm_mask(&path).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Ground-truth displacement for the `pair_id`-th pair, if shipped.
    pub fn truth(&self, pair_id: usize) -> Result<Option<VectorField>> {
        let path = self.root.join("truth").join(truth_names(pair_id).0);
        if path.is_file() {
            read_flo(&path).map(Some)
        } else {
            Ok(None)
        }
    }
}
