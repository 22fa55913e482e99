//! Limit lattices of the spiral: closed-form predictions from `(β, c, c̃, t, θ)`,
//! center indices realizing them, and the empirical comparison pipeline.

use std::f64::consts::{PI, TAU};
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::chabauty::{chabauty_distance, delta_bounded, radius_needed, Patch};
use crate::error::{Error, Result};
use crate::format::ser_f64;
use crate::geometry::{Point2, PointIndex};
use crate::lattice::{fit_lattice, lattice_ball, same_lattice, Basis2, LatticeFit};
use crate::number_theory::{convergents, limit_triplet, triplet, AngleSpec};
use crate::spiral::{angle_fraction, Spiral};

/// Largest window radius used when a distance needs a bigger window to be certified.
pub const MAX_CERTIFICATION_RADIUS: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictionInput {
    #[serde(serialize_with = "ser_f64")]
    pub beta: f64,
    #[serde(serialize_with = "ser_f64")]
    pub c: f64,
    #[serde(serialize_with = "ser_f64")]
    pub ctilde: f64,
    /// Scale of the diagonal stretch `diag(t, 1/t)`.
    #[serde(serialize_with = "ser_f64")]
    pub t: f64,
    /// Rotation angle in radians.
    #[serde(serialize_with = "ser_f64")]
    pub theta: f64,
}

impl PredictionInput {
    pub fn new(beta: f64, c: f64, ctilde: f64, t: f64, theta: f64) -> Result<Self> {
        if !(beta >= 1.0) {
            return Err(Error::InvalidArgument(format!("beta must be >= 1, got {beta}")));
        }
        if !(c * ctilde < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "c and c~ must have opposite signs, got {c} and {ctilde}"
            )));
        }
        if !(t > 0.0) || !t.is_finite() || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("need t > 0 and finite theta, got t={t}, theta={theta}")));
        }
        Ok(Self { beta, c, ctilde, t, theta })
    }

    /// Golden-angle triplet `(φ, s/√5, −s/√5)` with `s = ±1`.
    pub fn sunflower(sign: f64, t: f64, theta: f64) -> Result<Self> {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let c = sign.signum() / 5f64.sqrt();
        Self::new(phi, c, -c, t, theta)
    }

    /// `π|c̃/β − βc|`.
    pub fn covolume(&self) -> f64 {
        PI * (self.ctilde / self.beta - self.beta * self.c).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeForm {
    /// Columns `R(t, πc/t)` and `R(βt, πc̃/(βt))`.
    ProofForm,
    /// Columns `√π·R·A_t·(1, β)` and `√π·R·A_t·(c, c̃/β)`.
    TheoremForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictedLattice {
    pub basis: Basis2,
    pub form: LatticeForm,
    #[serde(serialize_with = "ser_f64")]
    pub covolume: f64,
}

/// Default prediction: `v = R_θ(t, πc/t)`, `ṽ = R_θ(βt, πc̃/(βt))`.
pub fn predicted_basis(input: &PredictionInput) -> PredictedLattice {
    let PredictionInput { beta, c, ctilde, t, theta } = *input;
    let v = Point2::new(t, PI * c / t).rotate(theta);
    let vt = Point2::new(beta * t, PI * ctilde / (beta * t)).rotate(theta);
    PredictedLattice {
        basis: Basis2 { v1: v, v2: vt },
        form: LatticeForm::ProofForm,
        covolume: input.covolume(),
    }
}

/// The alternative matrix `√π·R·A_t·[1 c; β c̃/β]`.
pub fn theorem_form_basis(input: &PredictionInput) -> PredictedLattice {
    let PredictionInput { beta, c, ctilde, t, theta } = *input;
    let s = PI.sqrt();
    let u = Point2::new(s * t, s * beta / t).rotate(theta);
    let w = Point2::new(s * t * c, s * ctilde / (beta * t)).rotate(theta);
    PredictedLattice {
        basis: Basis2 { v1: u, v2: w },
        form: LatticeForm::TheoremForm,
        covolume: input.covolume(),
    }
}

/// Which `β` enters the center formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    /// Limit of `q̃_j/q_j` along the residue class of `j` (quadratic irrationals).
    #[default]
    Limit,
    /// The finite ratio `q̃_j/q_j`.
    FiniteRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterEntry {
    pub j: usize,
    pub q: u64,
    pub q_next: u64,
    /// `β` used in the center formula.
    #[serde(serialize_with = "ser_f64")]
    pub beta: f64,
    pub n: u64,
    /// `frac(α·n)` in turns; the measured angle is `2π` times this.
    #[serde(serialize_with = "ser_f64")]
    pub theta_turns: f64,
    /// Triplet used for the prediction at this `j`.
    pub prediction: PredictionInput,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterSequence {
    #[serde(serialize_with = "ser_f64")]
    pub t: f64,
    pub beta_mode: BetaMode,
    pub entries: Vec<CenterEntry>,
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// `round(q·q̃ / (4t²β))`, rounded half away from zero in exact rational arithmetic
/// on the given `f64` inputs.
pub fn center_index(q: u64, q_next: u64, t: f64, beta: f64) -> Result<u64> {
    if !(t > 0.0) || !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("need t > 0 and beta > 0, got {t}, {beta}")));
    }
    let num = BigRational::from_integer(BigInt::from(q) * BigInt::from(q_next));
    let den = exact(4.0) * exact(t) * exact(t) * exact(beta);
    let value = num / den;
    let rounded = (value + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer();
    rounded
        .to_u64()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::InvalidArgument(format!("center index {rounded} out of range")))
}

/// Center indices `n_j` for each `j` in the range.
pub fn center_indices(alpha: &AngleSpec, t: f64, js: RangeInclusive<usize>, mode: BetaMode) -> Result<CenterSequence> {
    if *js.start() == 0 {
        return Err(Error::InvalidArgument("convergent index starts at 1".into()));
    }
    if alpha.is_rational() {
        return Err(Error::InvalidArgument(format!("{alpha} is rational")));
    }
    let cs = convergents(alpha, js.end() + 1)?;
    if cs.len() < js.end() + 1 {
        return Err(Error::InvalidArgument(format!("{alpha} has too few convergents")));
    }
    let mut entries = Vec::new();
    for j in js {
        let (q, q_next) = match (cs[j - 1].q.to_u64(), cs[j].q.to_u64()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidArgument(format!("q_{j} exceeds the index range"))),
        };
        let (beta_lim, c, ctilde) = match alpha {
            AngleSpec::QuadraticIrrational(_) => {
                let l = limit_triplet(alpha, j)?;
                (l.beta, l.c, l.ctilde)
            }
            _ => {
                let s = triplet(alpha, j)?;
                (s.beta.value, s.c.value, s.ctilde.value)
            }
        };
        let beta = match mode {
            BetaMode::Limit => beta_lim,
            BetaMode::FiniteRatio => q_next as f64 / q as f64,
        };
        let n = center_index(q, q_next, t, beta)?;
        let theta_turns = angle_fraction(alpha, n)?.turns;
        let prediction = PredictionInput::new(beta_lim.max(1.0), c, ctilde, t, TAU * theta_turns)?;
        entries.push(CenterEntry {
            j,
            q,
            q_next,
            beta,
            n,
            theta_turns,
            prediction,
        });
    }
    Ok(CenterSequence {
        t,
        beta_mode: mode,
        entries,
    })
}

/// A recentered spiral window `(X − x_n) ∩ B_W(0)` with the indices of its points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalPatch {
    pub center: u64,
    pub patch: Patch,
    pub indices: Vec<u64>,
}

impl EmpiricalPatch {
    /// Index offset `m − n` of each point.
    pub fn offsets(&self) -> Vec<i64> {
        self.indices.iter().map(|&m| m as i64 - self.center as i64).collect()
    }
}

pub fn empirical_limit_patch(spiral: &Spiral, n: u64, window_radius: f64) -> Result<EmpiricalPatch> {
    if !(window_radius >= 4.0) {
        return Err(Error::InvalidArgument(format!(
            "window radius must be at least 4, got {window_radius}"
        )));
    }
    let window = spiral.indices_near_index(n, window_radius)?;
    let points: Vec<Point2> = window
        .indices
        .iter()
        .map(|&m| if m == n { Point2::ORIGIN } else { spiral.displacement(m, n) })
        .collect();
    let patch = Patch::new(points, window_radius, format!("{} n={n}", spiral.alpha()))?;
    Ok(EmpiricalPatch {
        center: n,
        patch,
        indices: window.indices,
    })
}

/// A Chabauty distance together with the window it was certified on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceRecord {
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub window_radius: f64,
    /// True when even the largest window could not resolve the value; `value` is then
    /// a certified upper bound.
    pub resolution_limited: bool,
}

/// `d(X − x_n, Λ)`, growing the window until the value is certified or the cap is hit.
pub fn certified_distance(spiral: &Spiral, n: u64, basis: &Basis2, start_radius: f64, max_radius: f64) -> Result<DistanceRecord> {
    let mut radius = start_radius.max(4.0);
    loop {
        let patch = empirical_limit_patch(spiral, n, radius)?.patch;
        let lattice = lattice_ball(basis, radius)?;
        match chabauty_distance(&patch, &lattice) {
            Ok(value) => {
                return Ok(DistanceRecord {
                    value,
                    window_radius: radius,
                    resolution_limited: false,
                })
            }
            Err(Error::WindowTooSmall { needed, .. }) if radius < max_radius => {
                radius = (needed * 1.05).max(radius * 1.25).min(max_radius);
            }
            Err(Error::WindowTooSmall { .. }) => {
                let r = delta_bounded(&patch, &lattice)?;
                return Ok(DistanceRecord {
                    value: r.value.min(1.0),
                    window_radius: radius,
                    resolution_limited: true,
                });
            }
            Err(e) => return Err(e),
        }
    }
}

/// Approximate additive and inversion closure of a patch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureReport {
    pub sums_checked: usize,
    pub sum_violations: usize,
    pub inverses_checked: usize,
    pub inverse_violations: usize,
    #[serde(serialize_with = "ser_f64")]
    pub worst_sum_gap: f64,
    #[serde(serialize_with = "ser_f64")]
    pub worst_inverse_gap: f64,
}

impl ClosureReport {
    pub fn violations(&self) -> usize {
        self.sum_violations + self.inverse_violations
    }
}

/// For `|u|, |v| <= W/2` with `|u + v| <= W − 1`, a patch point within `tol` of
/// `u + v`; for `|u| <= W − 1`, a patch point within `tol` of `−u`.
pub fn group_closure(patch: &Patch, tol: f64) -> ClosureReport {
    let w = patch.window_radius;
    let index = PointIndex::with_auto_cell(&patch.points);
    let gap = |p: Point2| index.nearest(p).map_or(f64::INFINITY, |(_, d)| d);
    let half: Vec<Point2> = patch.points.iter().copied().filter(|p| p.norm() <= w / 2.0).collect();
    let (mut sums_checked, mut sum_violations, mut worst_sum_gap) = (0, 0, 0.0f64);
    for &u in &half {
        for &v in &half {
            let s = u + v;
            if s.norm() <= w - 1.0 {
                sums_checked += 1;
                let g = gap(s);
                worst_sum_gap = worst_sum_gap.max(g);
                if g >= tol {
                    sum_violations += 1;
                }
            }
        }
    }
    let (mut inverses_checked, mut inverse_violations, mut worst_inverse_gap) = (0, 0, 0.0f64);
    for &u in patch.points.iter().filter(|p| p.norm() <= w - 1.0) {
        inverses_checked += 1;
        let g = gap(-u);
        worst_inverse_gap = worst_inverse_gap.max(g);
        if g >= tol {
            inverse_violations += 1;
        }
    }
    ClosureReport {
        sums_checked,
        sum_violations,
        inverses_checked,
        inverse_violations,
        worst_sum_gap,
        worst_inverse_gap,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub fit: LatticeFit,
    /// `min |v1 ∓ (x_{n+q} − x_n)|` for the fitted shortest vector `v1`.
    #[serde(serialize_with = "ser_f64")]
    pub shortest_vector_gap: f64,
    /// Largest generator distance between the fitted and the proof-form lattice.
    #[serde(serialize_with = "ser_f64")]
    pub orientation_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub center: CenterEntry,
    pub proof_form: DistanceRecord,
    pub theorem_form: DistanceRecord,
    pub points: usize,
    pub fit: Option<FitSummary>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormVerdict {
    ProofForm,
    TheoremForm,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub alpha: String,
    #[serde(serialize_with = "ser_f64")]
    pub t: f64,
    #[serde(serialize_with = "ser_f64")]
    pub window_radius: f64,
    #[serde(serialize_with = "ser_f64")]
    pub tolerance: f64,
    pub beta_mode: BetaMode,
    pub rows: Vec<ComparisonRow>,
    /// Which form the last rows converge to.
    pub verdict: FormVerdict,
}

impl ComparisonReport {
    pub fn last(&self) -> Option<&ComparisonRow> {
        self.rows.last()
    }
}

/// The form whose distances over the last three rows are all below `tol` while the
/// other form's are all above `2·tol`.
fn adjudicate(rows: &[ComparisonRow], tol: f64) -> FormVerdict {
    let tail = &rows[rows.len().saturating_sub(3)..];
    if tail.is_empty() {
        return FormVerdict::Inconclusive;
    }
    let close = |f: fn(&ComparisonRow) -> f64| tail.iter().all(|r| f(r) < tol);
    let far = |f: fn(&ComparisonRow) -> f64| tail.iter().all(|r| f(r) > 2.0 * tol);
    let proof = |r: &ComparisonRow| r.proof_form.value;
    let theorem = |r: &ComparisonRow| r.theorem_form.value;
    if close(proof) && far(theorem) {
        FormVerdict::ProofForm
    } else if close(theorem) && far(proof) {
        FormVerdict::TheoremForm
    } else {
        FormVerdict::Inconclusive
    }
}

fn fit_summary(spiral: &Spiral, entry: &CenterEntry, patch: &Patch, tol: f64) -> Result<FitSummary> {
    let fit = fit_lattice(patch, tol)?;
    let step = spiral.displacement(entry.n + entry.q, entry.n);
    let v1 = fit.basis.v1();
    let shortest_vector_gap = (v1 - step).norm().min((v1 + step).norm());
    let predicted = predicted_basis(&entry.prediction);
    let orientation_gap = same_lattice(&fit.basis.basis, &predicted.basis, tol)?.max_generator_distance;
    Ok(FitSummary {
        fit,
        shortest_vector_gap,
        orientation_gap,
    })
}

fn comparison_row(spiral: &Spiral, entry: CenterEntry, window_radius: f64, tol: f64) -> Result<ComparisonRow> {
    let start = window_radius.max(radius_needed(tol));
    let proof = predicted_basis(&entry.prediction);
    let theorem = theorem_form_basis(&entry.prediction);
    let proof_form = certified_distance(spiral, entry.n, &proof.basis, start, MAX_CERTIFICATION_RADIUS)?;
    let theorem_form = certified_distance(spiral, entry.n, &theorem.basis, start, MAX_CERTIFICATION_RADIUS)?;
    let patch = empirical_limit_patch(spiral, entry.n, window_radius)?.patch;
    let (fit, fit_error) = match fit_summary(spiral, &entry, &patch, tol) {
        Ok(f) => (Some(f), None),
        Err(e @ Error::NotALattice { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(ComparisonRow {
        center: entry,
        proof_form,
        theorem_form,
        points: patch.len(),
        fit,
        fit_error,
    })
}

/// Patch-versus-prediction comparison at the centers `n_j`, with each prediction
/// rotated by the measured angle `2π·frac(α n_j)`.
pub fn empirical_vs_predicted(
    alpha: &AngleSpec,
    t: f64,
    js: RangeInclusive<usize>,
    window_radius: f64,
    tol: f64,
    mode: BetaMode,
) -> Result<ComparisonReport> {
    let spiral = Spiral::with_defaults(alpha)?;
    let centers = center_indices(alpha, t, js, mode)?;
    let rows = centers
        .entries
        .into_par_iter()
        .map(|e| comparison_row(&spiral, e, window_radius, tol))
        .collect::<Result<Vec<_>>>()?;
    let verdict = adjudicate(&rows, 0.1);
    Ok(ComparisonReport {
        alpha: alpha.to_string(),
        t,
        window_radius,
        tolerance: tol,
        beta_mode: mode,
        rows,
        verdict,
    })
}

/// `p_j·q̃_j − p̃_j·q_j` for each `j`; the finite-`j` covolume is `π` times its absolute value.
pub fn finite_covolume_determinants(alpha: &AngleSpec, js: RangeInclusive<usize>) -> Result<Vec<(usize, BigInt)>> {
    if *js.start() == 0 {
        return Err(Error::InvalidArgument("convergent index starts at 1".into()));
    }
    let cs = convergents(alpha, js.end() + 1)?;
    if cs.len() < js.end() + 1 {
        return Err(Error::InvalidArgument(format!("{alpha} has too few convergents")));
    }
    // q(q̃α − p̃) − q̃(qα − p) = p·q̃ − p̃·q, so α cancels exactly
    Ok(js
        .map(|j| {
            let (a, b) = (&cs[j - 1], &cs[j]);
            (j, &a.p * &b.q - &b.p * &a.q)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitEntry {
    pub b: i64,
    pub center: u64,
    /// `frac(α·b)`; the base lattice is rotated by `2π` times this.
    #[serde(serialize_with = "ser_f64")]
    pub rotation_turns: f64,
    pub matched: bool,
    #[serde(serialize_with = "ser_f64")]
    pub generator_distance: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitReport {
    pub base_center: u64,
    pub base: LatticeFit,
    pub entries: Vec<OrbitEntry>,
    pub matches: usize,
}

/// Fitted lattices at `n + b` against the base fit rotated by `2παb`.
pub fn rotation_orbit(spiral: &Spiral, base_center: u64, bs: RangeInclusive<i64>, window_radius: f64, tol: f64) -> Result<OrbitReport> {
    let base_patch = empirical_limit_patch(spiral, base_center, window_radius)?.patch;
    let base = fit_lattice(&base_patch, tol)?;
    let entries = bs
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|b| -> Result<OrbitEntry> {
            let center = base_center
                .checked_add_signed(b)
                .filter(|&c| c >= 1)
                .ok_or_else(|| Error::InvalidArgument(format!("center {base_center} + {b} out of range")))?;
            let turns = turn_of(spiral.alpha(), b)?;
            let target = base.basis.basis.rotated(TAU * turns);
            let patch = empirical_limit_patch(spiral, center, window_radius)?.patch;
            Ok(match fit_lattice(&patch, tol) {
                Ok(fit) => {
                    let cmp = same_lattice(&fit.basis.basis, &target, tol)?;
                    OrbitEntry {
                        b,
                        center,
                        rotation_turns: turns,
                        matched: cmp.equal,
                        generator_distance: cmp.max_generator_distance,
                        error: None,
                    }
                }
                Err(e @ Error::NotALattice { .. }) => OrbitEntry {
                    b,
                    center,
                    rotation_turns: turns,
                    matched: false,
                    generator_distance: f64::INFINITY,
                    error: Some(e.to_string()),
                },
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let matches = entries.iter().filter(|e| e.matched).count();
    Ok(OrbitReport {
        base_center,
        base,
        entries,
        matches,
    })
}

fn turn_of(alpha: &AngleSpec, b: i64) -> Result<f64> {
    let f = angle_fraction(alpha, b.unsigned_abs())?.turns;
    Ok(if b < 0 { (1.0 - f).rem_euclid(1.0) } else { f })
}

/// Largest circular gap among the turns `{frac(αb) : 0 <= b <= B}` for each `B`.
pub fn orbit_max_gaps(alpha: &AngleSpec, bounds: &[u64]) -> Result<Vec<(u64, f64)>> {
    let top = bounds.iter().copied().max().unwrap_or(0);
    let turns = (0..=top)
        .map(|b| angle_fraction(alpha, b).map(|f| f.turns))
        .collect::<Result<Vec<_>>>()?;
    Ok(bounds
        .iter()
        .map(|&bound| {
            let mut pts: Vec<f64> = turns[..=bound as usize].to_vec();
            pts.sort_by(f64::total_cmp);
            let wrap = 1.0 - pts[pts.len() - 1] + pts[0];
            let gap = pts.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max);
            (bound, gap)
        })
        .collect())
}

/// Sign of `c` at index `j`, exact for quadratic irrationals.
pub fn c_sign(alpha: &AngleSpec, j: usize) -> Result<i32> {
    let cs = convergents(alpha, j)?;
    let conv = cs.get(j - 1).ok_or_else(|| Error::InvalidArgument(format!("no convergent {j}")))?;
    let s = alpha.sign_affine(&conv.q, &conv.p)?;
    Ok(match s {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    const PHI: f64 = 1.618_033_988_749_895;

    #[test]
    fn sunflower_proof_form() {
        let input = PredictionInput::sunflower(1.0, 1.0, 0.0).unwrap();
        let p = predicted_basis(&input);
        // π/√5 and π/(√5·φ)
        assert!(p.basis.v1.dist(Point2::new(1.0, 1.404_962_946_208_145)) < 1e-12);
        assert!(p.basis.v2.dist(Point2::new(PHI, -0.868_314_853_690_823_8)) < 1e-12);
        assert!((p.covolume - PI).abs() < 1e-12);
        assert!((p.basis.det().abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_rotation() {
        let input = PredictionInput::new(1.3, 0.4, -0.2, 0.7, PI / 2.0).unwrap();
        let p = predicted_basis(&input);
        assert!(p.basis.v1.dist(Point2::new(-PI * 0.4 / 0.7, 0.7)) < 1e-12);
    }

    #[test]
    fn theorem_form_columns_and_determinant() {
        let input = PredictionInput::sunflower(1.0, 1.0, 0.0).unwrap();
        let th = theorem_form_basis(&input);
        let s = PI.sqrt();
        assert!(th.basis.v1.dist(Point2::new(s, s * PHI)) < 1e-12);
        assert!(th.basis.v2.dist(Point2::new(s / 5f64.sqrt(), -s / (5f64.sqrt() * PHI))) < 1e-12);
        for (t, theta) in [(1.0, 0.0), (0.3, 1.0), (2.5, -2.0)] {
            let i = PredictionInput::new(1.7, -0.3, 0.45, t, theta).unwrap();
            let a = predicted_basis(&i).basis.det().abs();
            let b = theorem_form_basis(&i).basis.det().abs();
            assert!((a - b).abs() < 1e-12 && (a - i.covolume()).abs() < 1e-12);
        }
        let cmp = same_lattice(&predicted_basis(&input).basis, &th.basis, 0.05).unwrap();
        assert!(!cmp.equal);
    }

    #[test]
    fn input_validation() {
        assert!(PredictionInput::new(0.9, 1.0, -1.0, 1.0, 0.0).is_err());
        assert!(PredictionInput::new(1.5, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(PredictionInput::new(1.5, 1.0, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn center_index_examples() {
        assert_eq!(center_index(34, 55, 1.0, PHI).unwrap(), 289);
        // 6765·10946/(4φ) = 11 441 306.319…
        assert_eq!(center_index(6765, 10946, 1.0, PHI).unwrap(), 11_441_306);
        let base = 6765.0 * 10946.0 / (4.0 * PHI);
        assert_eq!(center_index(6765, 10946, 2.0, PHI).unwrap(), (base / 4.0).round() as u64);
    }

    #[test]
    fn golden_centers() {
        let seq = center_indices(&AngleSpec::golden(), 1.0, 9..=10, BetaMode::Limit).unwrap();
        let e = &seq.entries[0];
        assert_eq!((e.q, e.q_next, e.n), (34, 55, 289));
        assert!((e.prediction.c.abs() - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!(e.prediction.c * seq.entries[1].prediction.c < 0.0);
        let finite = center_indices(&AngleSpec::golden(), 1.0, 9..=9, BetaMode::FiniteRatio).unwrap();
        assert!((finite.entries[0].n as i64 - 289).abs() <= 1);
    }

    #[test]
    fn patch_is_recentered_with_fibonacci_neighbours() {
        let s = Spiral::with_defaults(&AngleSpec::golden()).unwrap();
        let ep = empirical_limit_patch(&s, 289, 8.0).unwrap();
        assert!(ep.patch.points.contains(&Point2::ORIGIN));
        let mut by_norm: Vec<(f64, i64)> = ep
            .patch
            .points
            .iter()
            .zip(ep.offsets())
            .filter(|(_, o)| *o != 0)
            .map(|(p, o)| (p.norm(), o))
            .collect();
        by_norm.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(by_norm[0].1.abs(), 34);
        assert_eq!(by_norm[1].1.abs(), 34);
    }

    #[test]
    fn small_center_is_not_a_lattice() {
        let s = Spiral::with_defaults(&AngleSpec::golden()).unwrap();
        let ep = empirical_limit_patch(&s, 100, 8.0).unwrap();
        assert!(matches!(fit_lattice(&ep.patch, 0.05), Err(Error::NotALattice { .. })));
    }

    #[test]
    fn covolume_law_is_exact() {
        for spec in ["quad:1,1,2,5", "quad:0,1,1,2", "quad:0,1,1,3", "quad:1,1,2,13"] {
            let a: AngleSpec = spec.parse().unwrap();
            for (_, d) in finite_covolume_determinants(&a, 1..=40).unwrap() {
                assert_eq!(d.abs(), BigInt::one());
            }
        }
    }

    #[test]
    fn lattice_closure() {
        let b = predicted_basis(&PredictionInput::sunflower(1.0, 1.0, 0.4).unwrap());
        let r = group_closure(&lattice_ball(&b.basis, 8.0).unwrap(), 0.05);
        assert_eq!(r.violations(), 0);
        assert!(r.sums_checked > 100);
        let mut holes = lattice_ball(&b.basis, 8.0).unwrap();
        let far = holes.points.iter().position(|p| p.norm() > 2.0 && p.norm() < 3.0).unwrap();
        holes.points.remove(far);
        assert!(group_closure(&holes, 0.05).violations() > 0);
    }

    #[test]
    fn orbit_gaps_shrink() {
        let gaps = orbit_max_gaps(&AngleSpec::golden(), &[5, 10, 20, 50, 100]).unwrap();
        for w in gaps.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
        assert!(gaps[4].1 < 0.03);
    }

    #[test]
    fn c_signs_alternate() {
        let a = AngleSpec::golden();
        for j in 2..20 {
            assert_eq!(c_sign(&a, j).unwrap() * c_sign(&a, j + 1).unwrap(), -1);
        }
    }

    #[test]
    fn moderate_center_matches_proof_form() {
        let rep = empirical_vs_predicted(&AngleSpec::golden(), 1.0, 16..=17, 8.0, 0.05, BetaMode::Limit).unwrap();
        for row in &rep.rows {
            assert!(row.proof_form.value < row.theorem_form.value);
        }
    }
}
