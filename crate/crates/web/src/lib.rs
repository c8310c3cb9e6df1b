//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Three operations: calibrate one 3-class point and decide automate/defer,
//! paint the reliability field over the triangle, and the sample-size
//! calculator. The plain functions carry the logic; the `#[wasm_bindgen]`
//! wrappers only convert argument and error types.

use geocal::calibration::apply_calibration;
use geocal::reliability::{concentration_report, reliability_score};
use geocal::simplex::argmax_class;
use geocal::{CalibrationModel, ProbVector};
use wasm_bindgen::prelude::*;

const CLASS_RGB: [[f64; 3]; 3] = [[38.0, 102.0, 204.0], [204.0, 61.0, 46.0], [31.0, 153.0, 84.0]];
const DEFER_RGB: [f64; 3] = [150.0, 150.0, 150.0];
const PAD: f64 = 12.0;

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    calibrated: Vec<f64>,
    reliability: f64,
    predicted: usize,
    automated: bool,
}

#[wasm_bindgen]
impl Verdict {
    #[wasm_bindgen(getter)]
    pub fn calibrated(&self) -> Vec<f64> {
        self.calibrated.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn reliability(&self) -> f64 {
        self.reliability
    }

    #[wasm_bindgen(getter)]
    pub fn predicted(&self) -> usize {
        self.predicted
    }

    #[wasm_bindgen(getter)]
    pub fn automated(&self) -> bool {
        self.automated
    }
}

fn model(a: &[f64], b: &[f64]) -> Result<CalibrationModel, String> {
    CalibrationModel::from_parts(3, a.to_vec(), b.to_vec()).map_err(|e| e.to_string())
}

pub fn calibrate(p: &[f64], a: &[f64], b: &[f64], lambda: f64, tau: f64) -> Result<Verdict, String> {
    let m = model(a, b)?;
    let sum: f64 = p.iter().sum();
    if p.len() != 3 || p.iter().any(|v| *v < 0.0 || !v.is_finite()) || sum <= 0.0 {
        return Err("need three non-negative numbers with a positive sum".into());
    }
    let p = ProbVector::new(p.iter().map(|v| v / sum).collect()).map_err(|e| e.to_string())?;
    let cal = apply_calibration(&m, &p).map_err(|e| e.to_string())?;
    let reliability = reliability_score(&cal, lambda);
    Ok(Verdict {
        predicted: argmax_class(&cal),
        calibrated: cal.as_slice().to_vec(),
        reliability,
        automated: reliability >= tau,
    })
}

/// Barycentric coordinates of `(x, y)` in the triangle drawn on a
/// `width × height` canvas (class 0 at the top, 1 bottom left, 2 bottom right).
pub fn barycentric(x: f64, y: f64, width: f64, height: f64) -> [f64; 3] {
    let (x0, y0) = (width / 2.0, PAD);
    let (x1, y1) = (PAD, height - PAD);
    let (x2, y2) = (width - PAD, height - PAD);
    let det = (y1 - y2) * (x0 - x2) + (x2 - x1) * (y0 - y2);
    let l0 = ((y1 - y2) * (x - x2) + (x2 - x1) * (y - y2)) / det;
    let l1 = ((y2 - y0) * (x - x2) + (x0 - x2) * (y - y2)) / det;
    [l0, l1, 1.0 - l0 - l1]
}

/// Canvas position of a point of the simplex; inverse of [`barycentric`].
pub fn to_canvas(p: &[f64], width: f64, height: f64) -> [f64; 2] {
    let xs = [width / 2.0, PAD, width - PAD];
    let ys = [PAD, height - PAD, height - PAD];
    [
        p.iter().zip(xs).map(|(w, x)| w * x).sum(),
        p.iter().zip(ys).map(|(w, y)| w * y).sum(),
    ]
}

/// RGBA pixels: raw inputs inside the triangle coloured by the calibrated
/// prediction, faded toward white as reliability drops; deferred inputs grey.
pub fn reliability_field(
    width: u32,
    height: u32,
    a: &[f64],
    b: &[f64],
    lambda: f64,
    tau: f64,
) -> Result<Vec<u8>, String> {
    let m = model(a, b)?;
    let mut out = vec![0u8; width as usize * height as usize * 4];
    for py in 0..height {
        for px in 0..width {
            let l = barycentric(px as f64 + 0.5, py as f64 + 0.5, width as f64, height as f64);
            if l.iter().any(|&v| v < 0.0) {
                continue;
            }
            let p = ProbVector::new(l.to_vec()).map_err(|e| e.to_string())?;
            let cal = apply_calibration(&m, &p).map_err(|e| e.to_string())?;
            let r = reliability_score(&cal, lambda);
            let base = if r >= tau {
                CLASS_RGB[argmax_class(&cal)]
            } else {
                DEFER_RGB
            };
            let shade = 0.25 + 0.75 * r;
            let i = (py as usize * width as usize + px as usize) * 4;
            for k in 0..3 {
                out[i + k] = (255.0 - shade * (255.0 - base[k])).round() as u8;
            }
            out[i + 3] = 255;
        }
    }
    Ok(out)
}

/// `[sigma2, tail_coefficient, n_ours, n_naive]`.
pub fn sample_size(lambda: f64, t: f64, delta: f64) -> Result<Vec<f64>, String> {
    let r = concentration_report(lambda, t, delta).map_err(|e| e.to_string())?;
    Ok(vec![r.sigma2, r.tail_coefficient, r.n_ours as f64, r.n_naive as f64])
}

#[wasm_bindgen(js_name = calibrate)]
pub fn calibrate_js(p: Vec<f64>, a: Vec<f64>, b: Vec<f64>, lambda: f64, tau: f64) -> Result<Verdict, JsError> {
    calibrate(&p, &a, &b, lambda, tau).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = reliabilityField)]
pub fn reliability_field_js(
    width: u32,
    height: u32,
    a: Vec<f64>,
    b: Vec<f64>,
    lambda: f64,
    tau: f64,
) -> Result<Vec<u8>, JsError> {
    reliability_field(width, height, &a, &b, lambda, tau).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sampleSize)]
pub fn sample_size_js(lambda: f64, t: f64, delta: f64) -> Result<Vec<f64>, JsError> {
    sample_size(lambda, t, delta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = toCanvas)]
pub fn to_canvas_js(p: Vec<f64>, width: f64, height: f64) -> Vec<f64> {
    to_canvas(&p, width, height).to_vec()
}

#[wasm_bindgen(js_name = fromCanvas)]
pub fn from_canvas_js(x: f64, y: f64, width: f64, height: f64) -> Vec<f64> {
    barycentric(x, y, width, height).to_vec()
}
