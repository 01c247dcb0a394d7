use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpm::Material;

/// One observation: peak force at an approach speed on a material.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafetySample {
    /// Approach speed (m/s).
    pub v: f64,
    /// Young's modulus (Pa).
    pub youngs_modulus: f64,
    /// Yield stress (Pa).
    pub yield_stress: f64,
    /// Peak windowed force magnitude (N).
    pub force: f64,
}

/// Material features the force model conditions on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialFeatures {
    pub youngs_modulus: f64,
    pub yield_stress: f64,
}

impl From<&Material> for MaterialFeatures {
    fn from(m: &Material) -> Self {
        Self {
            youngs_modulus: m.youngs_modulus,
            yield_stress: m.yield_stress,
        }
    }
}

impl SafetySample {
    pub fn features(&self) -> MaterialFeatures {
        MaterialFeatures {
            youngs_modulus: self.youngs_modulus,
            yield_stress: self.yield_stress,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `c0 + c1 v + c2 E + c3 σy`
    Linear,
    /// `c0 + c1 v + c2 v² + c3 E + c4 σy + c5 v E`
    #[default]
    Quadratic,
}

impl ModelKind {
    pub fn feature_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Linear => &["1", "v", "E", "sigma_y"],
            ModelKind::Quadratic => &["1", "v", "v^2", "E", "sigma_y", "v*E"],
        }
    }

    fn features(self, v: f64, m: &MaterialFeatures) -> Vec<f64> {
        let (e, sy) = (m.youngs_modulus, m.yield_stress);
        match self {
            ModelKind::Linear => vec![1.0, v, e, sy],
            ModelKind::Quadratic => vec![1.0, v, v * v, e, sy, v * e],
        }
    }

    /// Partial derivatives of the features with respect to `v`.
    fn dfeatures_dv(self, v: f64, m: &MaterialFeatures) -> Vec<f64> {
        match self {
            ModelKind::Linear => vec![0.0, 1.0, 0.0, 0.0],
            ModelKind::Quadratic => vec![0.0, 1.0, 2.0 * v, 0.0, 0.0, m.youngs_modulus],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub sample_count: usize,
    pub residual_norm: f64,
    pub max_abs_residual: f64,
    /// Features dropped because the samples hold them constant.
    pub dropped: Vec<String>,
    pub v_range: (f64, f64),
}

/// Regression surface for the peak force.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceModel {
    pub kind: ModelKind,
    /// Coefficients in raw units, aligned with `kind.feature_names()`.
    pub coefficients: Vec<f64>,
    pub diagnostics: FitDiagnostics,
}

impl ForceModel {
    pub fn predict(&self, v: f64, m: &MaterialFeatures) -> f64 {
        self.kind
            .features(v, m)
            .iter()
            .zip(&self.coefficients)
            .map(|(f, c)| f * c)
            .sum()
    }

    pub fn dforce_dv(&self, v: f64, m: &MaterialFeatures) -> f64 {
        self.kind
            .dfeatures_dv(v, m)
            .iter()
            .zip(&self.coefficients)
            .map(|(f, c)| f * c)
            .sum()
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        serde_json::from_reader(input).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Relative tolerance under which a column counts as spanned by earlier ones.
const RANK_TOL: f64 = 1e-9;

/// Least-squares fit of the peak-force surface.
///
/// Material features the samples hold constant are dropped (coefficient 0);
/// `v*E` goes with `E`. Fits that decrease in `v` anywhere on the sampled
/// range of a training material are rejected.
pub fn fit_model(samples: &[SafetySample], kind: ModelKind) -> Result<ForceModel> {
    if let Some(s) = samples
        .iter()
        .find(|s| !(s.v >= 0.0 && s.force >= 0.0 && s.youngs_modulus.is_finite() && s.yield_stress.is_finite()))
    {
        return Err(Error::Fit(format!("invalid sample {s:?}")));
    }
    let names = kind.feature_names();
    let n_feat = names.len();
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| kind.features(s.v, &s.features())).collect();

    let constant = |get: fn(&SafetySample) -> f64| {
        samples.first().is_some_and(|first| samples.iter().all(|s| get(s) == get(first)))
    };
    let e_const = constant(|s| s.youngs_modulus);
    let sy_const = constant(|s| s.yield_stress);
    let mut active: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let drop = match *name {
            "E" | "v*E" => e_const,
            "sigma_y" => sy_const,
            _ => false,
        };
        if drop {
            dropped.push(name.to_string());
        } else {
            active.push(j);
        }
    }
    if samples.len() < active.len() {
        return Err(Error::Fit(format!(
            "{} samples cannot determine {} coefficients",
            samples.len(),
            active.len()
        )));
    }

    // Columns are scaled to unit max-abs so the rank test and solve are well conditioned.
    let scales: Vec<f64> = active
        .iter()
        .map(|&j| rows.iter().map(|r| r[j].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE))
        .collect();
    let design = DMatrix::from_fn(samples.len(), active.len(), |i, c| rows[i][active[c]] / scales[c]);
    check_rank(&design, &active.iter().map(|&j| names[j]).collect::<Vec<_>>())?;
    let target = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.force));
    let svd = design.clone().svd(true, true);
    let scaled = svd
        .solve(&target, 1e-14)
        .map_err(|e| Error::Fit(format!("least-squares solve failed: {e}")))?;

    let mut coefficients = vec![0.0; n_feat];
    for (c, &j) in active.iter().enumerate() {
        coefficients[j] = scaled[c] / scales[c];
    }
    let residuals = &design * &scaled - &target;
    let v_lo = samples.iter().map(|s| s.v).fold(f64::INFINITY, f64::min);
    let v_hi = samples.iter().map(|s| s.v).fold(f64::NEG_INFINITY, f64::max);
    let model = ForceModel {
        kind,
        coefficients,
        diagnostics: FitDiagnostics {
            sample_count: samples.len(),
            residual_norm: residuals.norm(),
            max_abs_residual: residuals.amax(),
            dropped,
            v_range: (v_lo, v_hi),
        },
    };
    check_monotone(&model, samples)?;
    Ok(model)
}

/// Gram-Schmidt pass that names the first column spanned by its predecessors.
fn check_rank(design: &DMatrix<f64>, names: &[&str]) -> Result<()> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for (c, name) in names.iter().enumerate() {
        let col = design.column(c).into_owned();
        let norm = col.norm();
        let mut r = col.clone();
        for b in &basis {
            let proj = b.dot(&r);
            r -= b * proj;
        }
        if !(norm > 0.0) || r.norm() <= RANK_TOL * norm {
            return Err(Error::Fit(format!(
                "design matrix is rank deficient: feature '{name}' is determined by the others"
            )));
        }
        basis.push(r.normalize());
    }
    Ok(())
}

fn check_monotone(model: &ForceModel, samples: &[SafetySample]) -> Result<()> {
    let (v_lo, v_hi) = model.diagnostics.v_range;
    let scale = samples.iter().map(|s| s.force).fold(0.0, f64::max).max(1.0) / v_hi.max(1e-12);
    for s in samples {
        let m = s.features();
        for v in [v_lo, v_hi] {
            let slope = model.dforce_dv(v, &m);
            if slope < -1e-9 * scale {
                return Err(Error::Fit(format!(
                    "fitted force decreases with speed (dF/dv = {slope:.4e} at v = {v}, E = {}, sigma_y = {}); \
                     coefficients {:?}, residual norm {:.4e}",
                    m.youngs_modulus, m.yield_stress, model.coefficients, model.diagnostics.residual_norm
                )));
            }
        }
    }
    Ok(())
}

/// Largest speed in `v_range` whose predicted force stays at or below `f_max`.
pub fn safe_velocity(model: &ForceModel, material: &MaterialFeatures, f_max: f64, v_range: (f64, f64)) -> Result<f64> {
    let (lo, hi) = v_range;
    if !(lo <= hi) || !(f_max > 0.0) {
        return Err(Error::Config(format!(
            "safe velocity needs lo <= hi and f_max > 0, got {lo}..{hi}, {f_max}"
        )));
    }
    let f_lo = model.predict(lo, material);
    if f_lo > f_max {
        return Err(Error::NoSafeVelocity {
            v_min: lo,
            force: f_lo,
            f_max,
        });
    }
    if model.predict(hi, material) <= f_max {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > 1e-6 {
        let mid = 0.5 * (a + b);
        if model.predict(mid, material) <= f_max {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a)
}

#[derive(Serialize, Deserialize)]
struct SampleRow {
    v: f64,
    #[serde(rename = "E")]
    youngs_modulus: f64,
    sigma_y: f64,
    #[serde(rename = "F")]
    force: f64,
}

/// Writes samples as `v,E,sigma_y,F` rows.
pub fn write_samples_csv<W: Write>(samples: &[SafetySample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(SampleRow {
            v: s.v,
            youngs_modulus: s.youngs_modulus,
            sigma_y: s.yield_stress,
            force: s.force,
        })
        .map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<SafetySample>> {
    csv::Reader::from_reader(input)
        .deserialize::<SampleRow>()
        .map(|row| {
            let r = row.map_err(|e| Error::Format(e.to_string()))?;
            Ok(SafetySample {
                v: r.v,
                youngs_modulus: r.youngs_modulus,
                yield_stress: r.sigma_y,
                force: r.force,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sample(v: f64, e: f64, sy: f64, f: f64) -> SafetySample {
        SafetySample {
            v,
            youngs_modulus: e,
            yield_stress: sy,
            force: f,
        }
    }

    fn mat(e: f64, sy: f64) -> MaterialFeatures {
        MaterialFeatures {
            youngs_modulus: e,
            yield_stress: sy,
        }
    }

    fn grid(f: impl Fn(f64, f64, f64) -> f64) -> Vec<SafetySample> {
        let mut out = Vec::new();
        for &v in &[0.2, 0.6, 1.0, 1.6, 2.5] {
            for &(e, sy) in &[(1e5, 1e4), (5e5, 1.5e4), (9e5, 3e4), (3e5, 2e4)] {
                out.push(sample(v, e, sy, f(v, e, sy)));
            }
        }
        out
    }

    #[test]
    fn recovers_exact_quadratic() {
        let samples = grid(|v, _, _| 3.0 + 2.0 * v * v);
        let m = fit_model(&samples, ModelKind::Quadratic).unwrap();
        assert_relative_eq!(m.coefficients[0], 3.0, epsilon = 1e-8);
        assert_relative_eq!(m.coefficients[2], 2.0, epsilon = 1e-8);
        assert!(m.coefficients[1].abs() < 1e-8);
    }

    #[test]
    fn recovers_full_surface() {
        let samples = grid(|v, e, sy| 1.0 + 4.0 * v + 0.5 * v * v + 2e-5 * e + 1e-4 * sy + 3e-5 * v * e);
        let m = fit_model(&samples, ModelKind::Quadratic).unwrap();
        let expect = [1.0, 4.0, 0.5, 2e-5, 1e-4, 3e-5];
        for (c, e) in m.coefficients.iter().zip(expect) {
            assert_relative_eq!(*c, e, max_relative = 1e-7, epsilon = 1e-10);
        }
        assert!(m.diagnostics.max_abs_residual < 1e-8);
    }

    #[test]
    fn constant_force_surface() {
        let samples = grid(|_, _, _| 42.0);
        let m = fit_model(&samples, ModelKind::Quadratic).unwrap();
        assert_relative_eq!(m.coefficients[0], 42.0, epsilon = 1e-8);
        for (c, s) in m.coefficients[1..].iter().zip([1.0, 1.0, 1e6, 1e5, 1e6]) {
            assert!((c * s).abs() < 1e-8, "{c}");
        }
    }

    #[test]
    fn single_material_drops_material_terms() {
        let samples: Vec<_> = [0.5, 1.0, 2.0, 3.0].iter().map(|&v| sample(v, 4e5, 2e4, 3.0 + 2.0 * v * v)).collect();
        let m = fit_model(&samples, ModelKind::Quadratic).unwrap();
        assert_eq!(m.diagnostics.dropped, vec!["E", "sigma_y", "v*E"]);
        assert_relative_eq!(m.coefficients[2], 2.0, epsilon = 1e-8);
        assert_eq!(m.coefficients[3], 0.0);
    }

    #[test]
    fn too_few_samples() {
        let samples = vec![sample(0.5, 1e5, 1e4, 1.0), sample(0.7, 1e5, 1e4, 2.0)];
        assert!(matches!(fit_model(&samples, ModelKind::Quadratic), Err(Error::Fit(_))));
    }

    #[test]
    fn rank_deficiency_names_feature() {
        // sigma_y tracks E exactly, so it adds nothing.
        let samples: Vec<_> = grid(|v, _, _| v)
            .into_iter()
            .map(|mut s| {
                s.yield_stress = s.youngs_modulus * 0.1;
                s
            })
            .collect();
        let err = fit_model(&samples, ModelKind::Quadratic).unwrap_err();
        assert!(err.to_string().contains("sigma_y"), "{err}");
    }

    #[test]
    fn decreasing_fit_is_rejected() {
        let samples = grid(|v, _, _| 100.0 - 10.0 * v);
        assert!(matches!(fit_model(&samples, ModelKind::Quadratic), Err(Error::Fit(_))));
    }

    fn model(coefficients: Vec<f64>) -> ForceModel {
        ForceModel {
            kind: ModelKind::Quadratic,
            coefficients,
            diagnostics: FitDiagnostics {
                sample_count: 0,
                residual_norm: 0.0,
                max_abs_residual: 0.0,
                dropped: vec![],
                v_range: (0.0, 10.0),
            },
        }
    }

    #[test]
    fn safe_velocity_examples() {
        let m = mat(1e5, 1e4);
        let v = safe_velocity(&model(vec![0.0, 0.0, 10.0, 0.0, 0.0, 0.0]), &m, 100.0, (0.0, 10.0)).unwrap();
        assert_relative_eq!(v, 10f64.sqrt(), epsilon = 1e-6);
        let v = safe_velocity(&model(vec![50.0, 0.0, 0.0, 0.0, 0.0, 0.0]), &m, 100.0, (0.0, 10.0)).unwrap();
        assert_eq!(v, 10.0);
        let err = safe_velocity(&model(vec![150.0, 0.0, 0.0, 0.0, 0.0, 0.0]), &m, 100.0, (0.0, 10.0));
        assert!(matches!(err, Err(Error::NoSafeVelocity { .. })));
    }

    #[test]
    fn samples_csv_round_trip() {
        let samples = grid(|v, e, _| v + e * 1e-6);
        let mut buf = Vec::new();
        write_samples_csv(&samples, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("v,E,sigma_y,F"));
        assert_eq!(read_samples_csv(buf.as_slice()).unwrap(), samples);
        let m = fit_model(&samples, ModelKind::Linear).unwrap();
        let mut js = Vec::new();
        m.write_json(&mut js).unwrap();
        assert_eq!(ForceModel::read_json(js.as_slice()).unwrap(), m);
    }

    proptest! {
        #[test]
        fn safe_velocity_monotone_in_limit(c0 in 0.0f64..50.0, c1 in 0.0f64..20.0, c2 in 0.0f64..20.0, f1 in 50.0f64..500.0, df in 0.0f64..200.0) {
            let m = model(vec![c0, c1, c2, 0.0, 0.0, 0.0]);
            let a = safe_velocity(&m, &mat(1e5, 1e4), f1, (0.0, 10.0)).unwrap();
            let b = safe_velocity(&m, &mat(1e5, 1e4), f1 + df, (0.0, 10.0)).unwrap();
            prop_assert!(b >= a);
        }
    }
}
