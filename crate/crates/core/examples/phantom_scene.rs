//! Builds the two-vessel phantom, renders a compression pair and writes the
//! frames, masks and true displacement to a directory.
//!
//! cargo run --example phantom_scene -- [out_dir]

use std::path::PathBuf;

use forcereg::flowviz::flow_to_color;
use forcereg::io::{write_flo, write_pgm_image, write_pgm_mask, write_ppm, PgmDepth};
use forcereg::metrics::{LABEL_ARTERY, LABEL_VEIN};
use forcereg::phantom::{make_scene, render_pair};
use forcereg::{DeltaForceVariant, ForcePair, PhantomConfig};

fn main() -> forcereg::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "phantom_out".into()),
    );
    std::fs::create_dir_all(&out)?;

    let scene = make_scene(&PhantomConfig::two_vessels(64, 3))?;
    let pair = render_pair(
        &scene,
        ForcePair::new(3.0, 6.0)?,
        DeltaForceVariant::Normalized,
    )?;
    let kx = scene.k_true.kx();
    println!(
        "kx surface {:.3}, bottom {:.3}",
        kx.get(0, 0),
        kx.get(63, 0)
    );
    println!(
        "artery {} px, vein {} px; after compression {} / {}",
        scene.masks.count(LABEL_ARTERY),
        scene.masks.count(LABEL_VEIN),
        pair.masks_target.count(LABEL_ARTERY),
        pair.masks_target.count(LABEL_VEIN),
    );
    println!(
        "df_true {:.5}, max dx {:.3} px",
        pair.df_true,
        pair.d_true.dx().max()
    );

    write_pgm_image(&out.join("moving.pgm"), &pair.moving, PgmDepth::Eight)?;
    write_pgm_image(&out.join("target.pgm"), &pair.target, PgmDepth::Eight)?;
    write_pgm_mask(&out.join("mask_moving.pgm"), &pair.masks_moving)?;
    write_pgm_mask(&out.join("mask_target.pgm"), &pair.masks_target)?;
    write_flo(&out.join("d_true.flo"), &pair.d_true)?;
    write_ppm(&out.join("d_true.ppm"), &flow_to_color(&pair.d_true, None))?;
    println!("wrote {}", out.display());
    Ok(())
}
