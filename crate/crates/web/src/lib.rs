//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string, so the page
//! needs no generated type glue beyond `wasm-bindgen`'s.

use serde::Serialize;
use sharpkit::monotones::{measurement_robustness_closed_form, optimal_guessing, tuning_value};
use sharpkit::operator::{HermitianOperator, LinearMap};
use sharpkit::povm::{classify, random_povm, Classification, Povm};
use sharpkit::preorder::{is_sharper, ConvertibilityStatus};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct NoisyBasis {
    eta: f64,
    sharp: bool,
    guessing: f64,
    tuning: f64,
    robustness: f64,
}

#[derive(Serialize)]
struct Comparison {
    status: ConvertibilityStatus,
    mu: Option<f64>,
    witness_margin: Option<f64>,
    proximity: f64,
}

#[derive(Serialize)]
struct RandomPovm {
    classification: Classification,
    guessing: f64,
    robustness_upper: f64,
}

fn to_js<T: Serialize>(v: sharpkit::Result<T>) -> Result<String, JsError> {
    let v = v.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// The qubit basis mixed with white noise, rotated by `angle` about the y axis.
fn rotated_noisy_basis(eta: f64, angle: f64) -> sharpkit::Result<Povm> {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let u = LinearMap::new(sharpkit::operator::CMatrix::from_row_slice(
        2,
        2,
        &[c.into(), (-s).into(), s.into(), c.into()],
    ));
    let base = Povm::noisy_qubit_basis(eta)?;
    let elements = base
        .elements()
        .iter()
        .map(|e| u.conjugate(e))
        .collect::<sharpkit::Result<Vec<HermitianOperator>>>()?;
    Povm::new(elements)
}

fn noisy_basis(eta: f64) -> sharpkit::Result<NoisyBasis> {
    let p = Povm::noisy_qubit_basis(eta)?;
    Ok(NoisyBasis {
        eta,
        sharp: classify(&p)?.sharp,
        guessing: optimal_guessing(&p)?.value,
        tuning: tuning_value(&p, &Povm::computational_basis(2))?,
        robustness: measurement_robustness_closed_form(&p)?,
    })
}

fn compare(eta_p: f64, eta_q: f64, angle: f64) -> sharpkit::Result<Comparison> {
    let v = is_sharper(&Povm::noisy_qubit_basis(eta_p)?, &rotated_noisy_basis(eta_q, angle)?)?;
    Ok(Comparison {
        status: v.status,
        mu: v.transformation.as_ref().map(|t| t.mu()),
        witness_margin: v.witness.as_ref().map(|w| w.margin),
        proximity: v.proximity,
    })
}

fn random(dim: usize, outcomes: usize, seed: u64) -> sharpkit::Result<RandomPovm> {
    let p = random_povm(dim, outcomes, seed)?;
    Ok(RandomPovm {
        classification: classify(&p)?,
        guessing: optimal_guessing(&p)?.value,
        robustness_upper: measurement_robustness_closed_form(&p)?,
    })
}

/// Monotones of the noisy qubit basis with visibility `eta`.
#[wasm_bindgen(js_name = noisyBasis)]
pub fn noisy_basis_js(eta: f64) -> Result<String, JsError> {
    to_js(noisy_basis(eta))
}

/// Whether the noisy basis with visibility `eta_p` can be fuzzified into the
/// one with visibility `eta_q` rotated by `angle` radians.
#[wasm_bindgen(js_name = compareNoisyBases)]
pub fn compare_js(eta_p: f64, eta_q: f64, angle: f64) -> Result<String, JsError> {
    to_js(compare(eta_p, eta_q, angle))
}

/// Classification and guessing probability of a seeded random POVM.
#[wasm_bindgen(js_name = randomPovm)]
pub fn random_js(dim: usize, outcomes: usize, seed: u32) -> Result<String, JsError> {
    to_js(random(dim, outcomes, u64::from(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noisy_basis_matches_closed_forms() {
        let r = noisy_basis(0.5).unwrap();
        assert!(!r.sharp);
        assert!((r.guessing - 0.75).abs() < 1e-6);
        assert!((r.tuning - 0.75).abs() < 1e-6);
        assert!((r.robustness - 0.5).abs() < 1e-9);
    }

    #[test]
    fn cleaner_bases_convert_to_noisier_ones() {
        let r = compare(0.9, 0.4, 1.0).unwrap();
        assert_eq!(r.status, ConvertibilityStatus::Convertible);
        let back = compare(0.4, 0.9, 1.0).unwrap();
        assert_eq!(back.status, ConvertibilityStatus::NotConvertible);
        assert!(back.witness_margin.unwrap() >= 1e-8);
    }

    #[test]
    fn rotation_preserves_validity() {
        let p = rotated_noisy_basis(1.0, 0.7).unwrap();
        assert!(classify(&p).unwrap().sharp);
    }

    #[test]
    fn random_povms_report() {
        let r = random(2, 3, 4).unwrap();
        assert!(!r.classification.sharp);
        assert!(r.guessing > 0.0 && r.guessing <= 1.0);
    }
}
