//! The four stiffness-to-displacement models on a small stiffness map.
//!
//! cargo run --example deformation_models

use forcereg::{
    deformation_from_stiffness, DeformationModel, ModelKind, ScalarField, StiffnessMap,
};

fn main() -> forcereg::Result<()> {
    let kx = ScalarField::from_vec(1, 4, vec![0.0, 0.5, 1.0, 2.0])?;
    let ky = kx.scale(-0.1);
    let k = StiffnessMap::new(kx, ky)?;
    let df = 0.6;

    let mut linear = DeformationModel::new(ModelKind::Linear);
    linear.alpha_x = 0.2;
    linear.beta_x = 1.5;
    let mut quadratic = DeformationModel::new(ModelKind::Quadratic);
    quadratic.gamma_x = 0.5;

    for model in [
        DeformationModel::proportional(),
        linear,
        quadratic,
        DeformationModel::direct(),
    ] {
        let d = deformation_from_stiffness(&k, df, &model);
        println!(
            "{:<13} dx = {:.3?}  dy = {:.3?}",
            model.tag.as_str(),
            d.dx().data(),
            d.dy().data()
        );
    }
    // Reversing the force flips every force-coupled displacement.
    let back = deformation_from_stiffness(&k, -df, &DeformationModel::proportional());
    println!(
        "PROPORTIONAL, df = {:+}: dx = {:.3?}",
        -df,
        back.dx().data()
    );
    Ok(())
}
