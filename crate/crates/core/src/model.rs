//! Domain types, seeded instance generation and the hinge objective.
//!
//! Training points are `x_i = r·x̃_i` with `x̃_i ~ N(0, I_d)` and labels
//! `y_i = sign(<x_i, a>)` for a unit-norm sparse classifier `a`. Gaussian
//! coordinates come from `rand_distr::StandardNormal` (ziggurat) driven by a
//! ChaCha8 stream selected by [`RngSeed`], so a `(base, stream)` pair
//! reproduces the same matrix bit-for-bit within one build.

use std::io::{Read, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{self, ProjectionResult};
use crate::linalg::{dot, norm1, norm2};

/// Seed for one reproducible random stream: a base seed plus a stream index
/// (usually the trial number).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub base: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(base: u64, stream: u64) -> Self {
        Self { base, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base);
        rng.set_stream(self.stream);
        rng
    }

    /// Derives an independent base seed from `self.base` and a list of tags,
    /// keeping the stream index. Used to give every sweep point its own seeds.
    pub fn derive(&self, tags: &[u64]) -> Self {
        let mut h = self.base;
        for &t in tags {
            h = splitmix64(h ^ splitmix64(t.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        Self {
            base: h,
            stream: self.stream,
        }
    }

    pub fn with_stream(&self, stream: u64) -> Self {
        Self {
            base: self.base,
            stream,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Ground-truth classifier: a unit vector with an explicit support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseClassifier {
    weights: Vec<f64>,
    support: Vec<usize>,
}

/// Nonzero entries of the fixed five-sparse classifier used in the r- and
/// m-sweeps, before normalization, as `(index, value)` for `d = 1000`.
pub const REFERENCE_ENTRIES: [(usize, f64); 5] =
    [(10, 1.0), (140, -1.0), (234, 0.5), (360, -0.5), (780, 0.3)];

impl SparseClassifier {
    /// Normalizes `v` to unit ℓ2 norm. The support is the set of nonzeros.
    pub fn from_unnormalized(mut v: Vec<f64>) -> Result<Self> {
        let n = norm2(&v);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Degenerate("classifier must be a finite nonzero vector"));
        }
        v.iter_mut().for_each(|x| *x /= n);
        let support = v
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(j, _)| j)
            .collect();
        Ok(Self { weights: v, support })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn l1_norm(&self) -> f64 {
        self.support.iter().map(|&j| self.weights[j].abs()).sum()
    }

    /// `<row, a>` summed over the support in index order.
    pub fn dot(&self, row: &[f64]) -> f64 {
        self.support.iter().map(|&j| row[j] * self.weights[j]).sum()
    }

    /// Writes `j,a_j` for each support entry; `j` is the zero-based index.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["j", "a_j"])?;
        for &j in &self.support {
            out.write_record([j.to_string(), format!("{:e}", self.weights[j])])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, d: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut v = vec![0.0; d];
        for rec in rdr.records() {
            let rec = rec?;
            let j: usize = parse_field(&rec, 0)?;
            let value: f64 = parse_field(&rec, 1)?;
            if j >= d {
                return Err(Error::Malformed(format!("index {j} out of range for d = {d}")));
            }
            v[j] = value;
        }
        Self::from_unnormalized(v)
    }
}

/// The fixed five-sparse classifier at its original positions, normalized.
/// Needs `d >= 781` so the largest index fits.
pub fn make_paper_classifier(d: usize) -> Result<SparseClassifier> {
    let needed = REFERENCE_ENTRIES.iter().map(|(j, _)| j + 1).max().unwrap_or(0);
    if d < needed {
        return Err(Error::invalid(
            "d",
            format!("fixed support needs d >= {needed}, got {d}"),
        ));
    }
    let mut v = vec![0.0; d];
    for &(j, x) in &REFERENCE_ENTRIES {
        v[j] = x;
    }
    SparseClassifier::from_unnormalized(v)
}

/// Same five values with positions rescaled proportionally from `d = 1000`
/// to `d` (`j -> floor(j·d/1000)`); identical to [`make_paper_classifier`]
/// for `d >= 781`. Under an i.i.d. Gaussian design the recovery error
/// distribution depends only on the values, not on where they sit.
pub fn make_fixed_classifier(d: usize) -> Result<SparseClassifier> {
    if d >= 781 {
        return make_paper_classifier(d);
    }
    let mut v = vec![0.0; d];
    for &(j, x) in &REFERENCE_ENTRIES {
        let pos = j * d / 1000;
        if v[pos] != 0.0 {
            return Err(Error::invalid("d", format!("d = {d} too small for five distinct positions")));
        }
        v[pos] = x;
    }
    SparseClassifier::from_unnormalized(v)
}

/// Uniformly random support of size `s`, i.i.d. standard Gaussian values on it,
/// normalized to unit ℓ2 norm.
pub fn make_random_classifier(d: usize, s: usize, seed: RngSeed) -> Result<SparseClassifier> {
    if s == 0 || s > d {
        return Err(Error::invalid("s", format!("need 1 <= s <= d, got s = {s}, d = {d}")));
    }
    let mut rng = seed.rng();
    random_classifier_from(&mut rng, d, s)
}

pub(crate) fn random_classifier_from<R: Rng>(rng: &mut R, d: usize, s: usize) -> Result<SparseClassifier> {
    let mut v = vec![0.0; d];
    let mut idx = index::sample(rng, d, s).into_vec();
    idx.sort_unstable();
    for j in idx {
        // A Gaussian draw of exactly zero would shrink the support.
        loop {
            let x: f64 = rng.sample(StandardNormal);
            if x != 0.0 {
                v[j] = x;
                break;
            }
        }
    }
    SparseClassifier::from_unnormalized(v)
}

/// Row-major `m × d` training matrix with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    x: Vec<f64>,
    labels: Vec<i8>,
    d: usize,
    scale: f64,
    seed: Option<RngSeed>,
}

impl TrainingSet {
    /// Builds a set from explicit rows and labels. `scale` is metadata only;
    /// the rows are used as given.
    pub fn from_parts(x: Vec<f64>, labels: Vec<i8>, d: usize, scale: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d", "dimension must be positive"));
        }
        if x.len() != labels.len() * d {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * d,
                found: x.len(),
            });
        }
        if labels.is_empty() {
            return Err(Error::invalid("m", "need at least one sample"));
        }
        if labels.iter().any(|&y| y != 1 && y != -1) {
            return Err(Error::Malformed("labels must be +1 or -1".into()));
        }
        if !(scale > 0.0) {
            return Err(Error::invalid("r", "scale must be positive"));
        }
        Ok(Self {
            x,
            labels,
            d,
            scale,
            seed: None,
        })
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn seed(&self) -> Option<RngSeed> {
        self.seed
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn matrix(&self) -> &[f64] {
        &self.x
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.d)
    }

    /// Rows multiplied by their labels, `z_i = y_i x_i`. Sign flips are exact,
    /// so `<z_i, w>` equals `y_i <x_i, w>` bit-for-bit.
    pub fn signed_rows(&self) -> Vec<f64> {
        let mut z = self.x.clone();
        for (row, &y) in z.chunks_exact_mut(self.d).zip(&self.labels) {
            if y < 0 {
                row.iter_mut().for_each(|v| *v = -*v);
            }
        }
        z
    }

    /// `Σ_i y_i x_i`.
    pub fn label_weighted_sum(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.d];
        for (row, &y) in self.rows().zip(&self.labels) {
            let y = f64::from(y);
            g.iter_mut().zip(row).for_each(|(gj, xj)| *gj += y * xj);
        }
        g
    }

    /// The same points multiplied by `factor`; labels are kept.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::invalid("factor", "must be positive"));
        }
        Ok(Self {
            x: self.x.iter().map(|v| v * factor).collect(),
            labels: self.labels.clone(),
            d: self.d,
            scale: self.scale * factor,
            seed: self.seed,
        })
    }

    /// Writes header `i,y,x_1,...,x_d` and one row per sample (`i` zero-based).
    /// Values use Rust's shortest round-trip representation.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["i".to_string(), "y".to_string()];
        header.extend((1..=self.d).map(|j| format!("x_{j}")));
        out.write_record(&header)?;
        let mut rec = Vec::with_capacity(self.d + 2);
        for (i, (row, &y)) in self.rows().zip(&self.labels).enumerate() {
            rec.clear();
            rec.push(i.to_string());
            rec.push(y.to_string());
            rec.extend(row.iter().map(|v| format!("{v:?}")));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the format written by [`TrainingSet::write_csv`]. The scale of
    /// the imported points is unknown and recorded as 1.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.len() < 3 || &header[0] != "i" || &header[1] != "y" {
            return Err(Error::Malformed("expected header i,y,x_1,...,x_d".into()));
        }
        for (k, name) in header.iter().skip(2).enumerate() {
            if name != format!("x_{}", k + 1) {
                return Err(Error::Malformed(format!("unexpected column `{name}`")));
            }
        }
        let d = header.len() - 2;
        let mut x = Vec::new();
        let mut labels = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != d + 2 {
                return Err(Error::Malformed(format!("row has {} fields, expected {}", rec.len(), d + 2)));
            }
            labels.push(parse_field::<i8>(&rec, 1)?);
            for k in 0..d {
                x.push(parse_field::<f64>(&rec, k + 2)?);
            }
        }
        Self::from_parts(x, labels, d, 1.0)
    }
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize) -> Result<T> {
    let raw = rec
        .get(k)
        .ok_or_else(|| Error::Malformed(format!("missing field {k}")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Malformed(format!("cannot parse `{raw}`")))
}

/// Draws `m` rows `x_i = r·x̃_i` and labels them with `a`. Rows whose inner
/// product with `a` is exactly zero are redrawn so every label is ±1.
pub fn generate_training_set(
    a: &SparseClassifier,
    m: usize,
    r: f64,
    seed: RngSeed,
) -> Result<TrainingSet> {
    if m == 0 {
        return Err(Error::invalid("m", "need at least one sample"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid("r", format!("scale must be positive, got {r}")));
    }
    let mut rng = seed.rng();
    let mut ts = training_set_from(&mut rng, a, m, r)?;
    ts.seed = Some(seed);
    Ok(ts)
}

pub(crate) fn training_set_from<R: Rng>(
    rng: &mut R,
    a: &SparseClassifier,
    m: usize,
    r: f64,
) -> Result<TrainingSet> {
    let d = a.dim();
    let mut x = vec![0.0; m * d];
    let mut labels = Vec::with_capacity(m);
    for row in x.chunks_exact_mut(d) {
        loop {
            for v in row.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v = r * z;
            }
            let s = a.dot(row);
            if s != 0.0 {
                labels.push(if s > 0.0 { 1 } else { -1 });
                break;
            }
        }
    }
    TrainingSet::from_parts(x, labels, d, r)
}

/// Labels `sign(<x_i, a>)` recomputed from the stored rows.
pub fn relabel(a: &SparseClassifier, t: &TrainingSet) -> Vec<i8> {
    t.rows()
        .map(|row| {
            let s = a.dot(row);
            if s > 0.0 {
                1
            } else if s < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// `f_a(w) = (1/m) Σ [1 - y_i <x_i, w>]_+`.
pub fn hinge_objective(w: &[f64], t: &TrainingSet) -> Result<f64> {
    if w.len() != t.d() {
        return Err(Error::DimensionMismatch {
            expected: t.d(),
            found: w.len(),
        });
    }
    let total: f64 = t
        .rows()
        .zip(t.labels())
        .map(|(row, &y)| (1.0 - f64::from(y) * dot(row, w)).max(0.0))
        .sum();
    Ok(total / t.m() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `{w : ‖w‖_1 <= R}`
    L1Ball,
    /// `{w : ‖w‖_1 <= R, ‖w‖_2 <= 1}`
    L1L2Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSet {
    kind: ConstraintKind,
    l1_radius: f64,
    l2_radius: f64,
}

impl ConstraintSet {
    pub fn l1_ball(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self {
            kind: ConstraintKind::L1Ball,
            l1_radius: radius,
            l2_radius: f64::INFINITY,
        })
    }

    pub fn l1_l2(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self {
            kind: ConstraintKind::L1L2Intersection,
            l1_radius: radius,
            l2_radius: 1.0,
        })
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn l1_radius(&self) -> f64 {
        self.l1_radius
    }

    pub fn l2_radius(&self) -> f64 {
        self.l2_radius
    }

    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        norm1(w) <= self.l1_radius + tol && norm2(w) <= self.l2_radius + tol
    }

    /// Euclidean projection. The intersection uses the closed-form KKT route
    /// ([`geometry::project_l1_l2_closed_form`]).
    pub fn project(&self, v: &[f64]) -> Result<ProjectionResult> {
        match self.kind {
            ConstraintKind::L1Ball => geometry::project_l1(v, self.l1_radius),
            ConstraintKind::L1L2Intersection => {
                geometry::project_l1_l2_closed_form(v, self.l1_radius)
            }
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius >= 1.0) || !radius.is_finite() {
        return Err(Error::invalid("R", format!("ℓ1 radius must be >= 1, got {radius}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_classifier_values() {
        let a = make_paper_classifier(1000).unwrap();
        let norm = 2.59f64.sqrt();
        assert_abs_diff_eq!(a.weights()[10], 1.0 / norm, epsilon = 1e-15);
        assert_abs_diff_eq!(a.weights()[10], 0.62137, epsilon = 1e-5);
        assert_eq!(a.sparsity(), 5);
        assert_eq!(a.support(), &[10, 140, 234, 360, 780]);
        // 1 + 1 + 0.5 + 0.5 + 0.3 = 3.3
        assert_abs_diff_eq!(a.l1_norm(), 3.3 / norm, epsilon = 1e-14);
        assert_abs_diff_eq!(a.l1_norm(), 2.0506, epsilon = 1e-4);
        assert_abs_diff_eq!(norm2(a.weights()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reference_classifier_dimension_boundary() {
        assert!(make_paper_classifier(781).is_ok());
        assert!(make_paper_classifier(780).is_err());
    }

    #[test]
    fn fixed_classifier_keeps_values() {
        let a = make_fixed_classifier(300).unwrap();
        let b = make_paper_classifier(1000).unwrap();
        assert_eq!(a.support(), &[3, 42, 70, 108, 234]);
        let va: Vec<f64> = a.support().iter().map(|&j| a.weights()[j]).collect();
        let vb: Vec<f64> = b.support().iter().map(|&j| b.weights()[j]).collect();
        assert_eq!(va, vb);
        assert_eq!(make_fixed_classifier(1000).unwrap(), b);
        assert!(make_fixed_classifier(3).is_err());
    }

    #[test]
    fn random_classifier_contract() {
        let a = make_random_classifier(100, 5, RngSeed::new(7, 0)).unwrap();
        assert_eq!(a.sparsity(), 5);
        assert_abs_diff_eq!(norm2(a.weights()), 1.0, epsilon = 1e-12);
        assert!(a.l1_norm() <= 5f64.sqrt() + 1e-12);
        for j in 0..100 {
            assert_eq!(a.weights()[j] != 0.0, a.support().contains(&j));
        }
        let dense = make_random_classifier(5, 5, RngSeed::new(7, 0)).unwrap();
        assert_eq!(dense.sparsity(), 5);
        let again = make_random_classifier(100, 5, RngSeed::new(7, 0)).unwrap();
        assert_eq!(a, again);
        let other = make_random_classifier(100, 5, RngSeed::new(7, 1)).unwrap();
        assert_ne!(a, other);
        assert!(make_random_classifier(4, 5, RngSeed::new(7, 0)).is_err());
        assert!(make_random_classifier(4, 0, RngSeed::new(7, 0)).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = make_random_classifier(20, 3, RngSeed::new(1, 0)).unwrap();
        let t1 = generate_training_set(&a, 50, 1.5, RngSeed::new(3, 4)).unwrap();
        let t2 = generate_training_set(&a, 50, 1.5, RngSeed::new(3, 4)).unwrap();
        assert_eq!(t1, t2);
        let t3 = generate_training_set(&a, 50, 1.5, RngSeed::new(3, 5)).unwrap();
        assert_ne!(t1.matrix(), t3.matrix());
        assert_eq!(relabel(&a, &t1), t1.labels());
        assert!(generate_training_set(&a, 0, 1.0, RngSeed::new(0, 0)).is_err());
        assert!(generate_training_set(&a, 5, 0.0, RngSeed::new(0, 0)).is_err());
    }

    #[test]
    fn second_moment_matches_scale() {
        // E ‖x_i‖² / (r² d) = 1; the mean of m = 10000 chi-square(50)/50 draws
        // has standard deviation sqrt(2/50)/100 = 0.002.
        let a = make_random_classifier(50, 3, RngSeed::new(11, 0)).unwrap();
        let r = 1.7;
        let t = generate_training_set(&a, 10_000, r, RngSeed::new(11, 1)).unwrap();
        let mean = t.rows().map(|row| dot(row, row)).sum::<f64>() / (t.m() as f64 * r * r * 50.0);
        assert!((mean - 1.0).abs() < 0.05, "mean = {mean}");
    }

    #[test]
    fn max_norm_sandwich() {
        let d = 1000usize;
        let a = make_random_classifier(d, 5, RngSeed::new(2, 0)).unwrap();
        let t = generate_training_set(&a, 10_000, 1.0, RngSeed::new(2, 1)).unwrap();
        let mean = t
            .rows()
            .map(|row| row.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .sum::<f64>()
            / t.m() as f64;
        let lo = (d as f64).ln().sqrt() / 4.0;
        let hi = (2.0 * (2.0 * d as f64).ln()).sqrt();
        assert_abs_diff_eq!(lo, 0.657, epsilon = 1e-3);
        assert_abs_diff_eq!(hi, 3.899, epsilon = 1e-3);
        assert!(lo <= mean && mean <= hi, "mean = {mean}");
    }

    #[test]
    fn hinge_examples() {
        let t = TrainingSet::from_parts(vec![1.0, 0.0, 0.0, 1.0], vec![1, -1], 2, 1.0).unwrap();
        assert_eq!(hinge_objective(&[0.0, 0.0], &t).unwrap(), 1.0);
        // (1/2)([1 - 0.5]_+ + [1 + 0.25]_+)
        assert_abs_diff_eq!(hinge_objective(&[0.5, 0.25], &t).unwrap(), 0.875, epsilon = 1e-15);
        assert_eq!(hinge_objective(&[2.0, -3.0], &t).unwrap(), 0.0);
        assert!(matches!(
            hinge_objective(&[1.0], &t),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn constraint_set_validation() {
        assert!(ConstraintSet::l1_ball(0.5).is_err());
        assert!(ConstraintSet::l1_l2(f64::NAN).is_err());
        let k = ConstraintSet::l1_l2(1.5).unwrap();
        assert_eq!(k.l2_radius(), 1.0);
        assert!(k.contains(&[0.6, 0.6], 0.0));
        assert!(!k.contains(&[1.0, 0.6], 0.0));
    }

    #[test]
    fn csv_roundtrip() {
        let a = make_random_classifier(7, 3, RngSeed::new(5, 0)).unwrap();
        let t = generate_training_set(&a, 9, 0.3, RngSeed::new(5, 1)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let header = String::from_utf8(buf.clone()).unwrap();
        assert!(header.starts_with("i,y,x_1,x_2,x_3,x_4,x_5,x_6,x_7\n"));
        let back = TrainingSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.matrix(), t.matrix());
        assert_eq!(back.labels(), t.labels());

        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 4);
        let back = SparseClassifier::read_csv(buf.as_slice(), 7).unwrap();
        for (x, y) in back.weights().iter().zip(a.weights()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
        assert!(TrainingSet::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
