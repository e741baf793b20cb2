//! Order-dependent drift specifications and their stability analysis.
//!
//! A drift specification assigns to every ordering `σ` a velocity vector
//! `b(σ) ∈ R^n`, with `b_i(σ)` the drift of particle `i` while the
//! configuration is ordered by `σ`. Two families are supported:
//!
//! * **general** — an explicit table over all `n!` orderings;
//! * **rank-based** — a single vector `b` applied by rank,
//!   `b_{σ(i)}(σ) = b_i`, i.e. the particle currently holding rank `i`
//!   moves at speed `b_i`.
//!
//! The *stability condition* (SC) requires, for every ordering and every
//! split point, the mean drift of the left group to dominate the mean drift
//! of the right group — equivalently all prefix sums of the centered,
//! rank-ordered drift to be nonnegative. Its strict version (SSC) asks for a
//! positive margin `b̄`, the infimum of those prefix sums. SC is exactly the
//! condition under which colliding particles stick instead of splitting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordering::{factorial, Permutation};
use crate::scalar::Scalar;

/// Which family a [`DriftSpec`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriftKind {
    General,
    RankBased,
}

#[derive(Clone, Debug)]
enum Repr<S> {
    Table(BTreeMap<Permutation, Vec<S>>),
    Rank(Vec<S>),
}

/// An order-dependent drift `σ ↦ b(σ)`.
#[derive(Clone, Debug)]
pub struct DriftSpec<S> {
    n: usize,
    repr: Repr<S>,
}

impl<S: Scalar> DriftSpec<S> {
    /// Rank-based specification: rank `i` moves at speed `b[i]`.
    pub fn rank_based(b: Vec<S>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::invalid("rank vector must be nonempty"));
        }
        Ok(DriftSpec {
            n: b.len(),
            repr: Repr::Rank(b),
        })
    }

    /// General specification from a complete table over all `n!` orderings.
    pub fn general(table: BTreeMap<Permutation, Vec<S>>) -> Result<Self> {
        let n = match table.keys().next() {
            Some(p) => p.n(),
            None => return Err(Error::invalid("drift table must be nonempty")),
        };
        if table.len() != factorial(n) {
            return Err(Error::invalid(format!(
                "drift table has {} entries, expected {}! = {}",
                table.len(),
                n,
                factorial(n)
            )));
        }
        for (sigma, v) in &table {
            if sigma.n() != n || v.len() != n {
                return Err(Error::invalid(format!(
                    "drift table entry {sigma} has inconsistent dimension"
                )));
            }
        }
        Ok(DriftSpec {
            n,
            repr: Repr::Table(table),
        })
    }

    /// Convenience constructor for two-particle general specifications from
    /// the velocity vectors in configuration `(12)` and `(21)`.
    pub fn two_particle(b12: [S; 2], b21: [S; 2]) -> Self {
        let mut table = BTreeMap::new();
        table.insert(Permutation::identity(2), b12.to_vec());
        table.insert(Permutation::new(vec![1, 0]).unwrap(), b21.to_vec());
        DriftSpec {
            n: 2,
            repr: Repr::Table(table),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DriftKind {
        match self.repr {
            Repr::Table(_) => DriftKind::General,
            Repr::Rank(_) => DriftKind::RankBased,
        }
    }

    /// The rank vector of a rank-based specification.
    pub fn rank_vector(&self) -> Option<&[S]> {
        match &self.repr {
            Repr::Rank(b) => Some(b),
            Repr::Table(_) => None,
        }
    }

    /// The velocity vector `b(σ)`, indexed by particle.
    pub fn drift_vector(&self, sigma: &Permutation) -> Vec<S> {
        assert_eq!(sigma.n(), self.n, "ordering dimension mismatch");
        match &self.repr {
            Repr::Table(t) => t.get(sigma).expect("complete table").clone(),
            Repr::Rank(b) => {
                let mut out = vec![S::zero(); self.n];
                for (k, &particle) in sigma.word().iter().enumerate() {
                    out[particle] = b[k].clone();
                }
                out
            }
        }
    }

    /// The drift seen by ranks: `k ↦ b_{σ(k+1)}(σ)`.
    pub fn rank_ordered_drift(&self, sigma: &Permutation) -> Vec<S> {
        match &self.repr {
            Repr::Rank(b) => b.clone(),
            Repr::Table(_) => sigma.gather(&self.drift_vector(sigma)),
        }
    }

    /// The centered specification `b^Π(σ) = b(σ) - mean(b(σ))·1`, which
    /// drives the projected dynamics on the zero-mean hyperplane.
    pub fn projected(&self) -> DriftSpec<S> {
        match &self.repr {
            Repr::Rank(b) => DriftSpec {
                n: self.n,
                repr: Repr::Rank(crate::ordering::project_centered(b)),
            },
            Repr::Table(t) => DriftSpec {
                n: self.n,
                repr: Repr::Table(
                    t.iter()
                        .map(|(s, v)| (s.clone(), crate::ordering::project_centered(v)))
                        .collect(),
                ),
            },
        }
    }
}

/// One failure of the stability condition: at ordering `sigma`, the mean
/// drift of ranks `1..=split` is below the mean drift of ranks `split+1..=n`.
#[derive(Clone, Debug)]
pub struct ScViolation<S> {
    pub sigma: Permutation,
    /// Split position, `1..=n-1` (number of ranks in the left group).
    pub split: usize,
    pub left_avg: S,
    pub right_avg: S,
}

/// Outcome of the stability analysis.
///
/// Invariants: `satisfies_ssc` implies `satisfies_sc`, and
/// `satisfies_ssc == (b_bar > 0)`.
#[derive(Clone, Debug)]
pub struct StabilityReport<S> {
    pub satisfies_sc: bool,
    pub satisfies_ssc: bool,
    /// `inf` over orderings and splits of the prefix sums of the centered
    /// rank-ordered drift; positive exactly under SSC.
    pub b_bar: S,
    pub violations: Vec<ScViolation<S>>,
}

/// When enumerating all orderings is affordable we do so and report every
/// violating `(σ, split)`; beyond this bound rank-based specifications fall
/// back to the `O(n)` rank computation (the prefix sums do not depend on `σ`)
/// and report violations against the identity word as representative.
const ENUMERATION_LIMIT: usize = 8;

/// Full stability analysis of a specification (`n >= 2`).
pub fn analyze_stability<S: Scalar>(spec: &DriftSpec<S>) -> Result<StabilityReport<S>> {
    let n = spec.n();
    if n < 2 {
        return Err(Error::invalid("stability analysis needs n >= 2"));
    }
    let slack = S::tolerance();
    let mut b_bar: Option<S> = None;
    let mut violations = Vec::new();

    let mut scan = |sigma: &Permutation, ranked: &[S]| {
        let centered = crate::ordering::project_centered(ranked);
        let mut prefix_centered = S::zero();
        let mut prefix_raw = S::zero();
        let total: S = ranked.iter().cloned().fold(S::zero(), |a, v| a + v);
        for i in 1..n {
            prefix_centered = prefix_centered + centered[i - 1].clone();
            prefix_raw = prefix_raw.clone() + ranked[i - 1].clone();
            if b_bar.as_ref().map_or(true, |m| prefix_centered < *m) {
                b_bar = Some(prefix_centered.clone());
            }
            let left_avg = prefix_raw.clone() / S::from_count(i);
            let right_avg = (total.clone() - prefix_raw.clone()) / S::from_count(n - i);
            if left_avg.clone() < right_avg.clone() - slack.clone() {
                violations.push(ScViolation {
                    sigma: sigma.clone(),
                    split: i,
                    left_avg,
                    right_avg,
                });
            }
        }
    };

    match (&spec.repr, n <= ENUMERATION_LIMIT) {
        (Repr::Rank(b), false) => {
            // Ordering-independent for rank-based drifts.
            scan(&Permutation::identity(n), b);
        }
        _ => {
            for sigma in Permutation::all(n) {
                let ranked = spec.rank_ordered_drift(&sigma);
                scan(&sigma, &ranked);
            }
        }
    }

    let b_bar = b_bar.expect("n >= 2 guarantees at least one split");
    Ok(StabilityReport {
        satisfies_sc: violations.is_empty(),
        satisfies_ssc: b_bar > S::zero(),
        b_bar,
        violations,
    })
}

/// Stability condition check (weak form). See [`analyze_stability`].
pub fn check_sc<S: Scalar>(spec: &DriftSpec<S>) -> Result<StabilityReport<S>> {
    analyze_stability(spec)
}

/// Strict stability condition check. See [`analyze_stability`].
pub fn check_ssc<S: Scalar>(spec: &DriftSpec<S>) -> Result<StabilityReport<S>> {
    analyze_stability(spec)
}

/// Sign class of a two-particle specification. With
/// `b⁻ = b₁(12) − b₂(12)` and `b⁺ = b₁(21) − b₂(21)`:
/// configuration `(12)` is converging iff `b⁻ >= 0`, configuration `(21)`
/// iff `b⁺ <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Config2Class {
    /// Both configurations converging (`b⁻ >= 0 >= b⁺`, not both zero).
    ConvConv,
    /// `(12)` converging, `(21)` diverging (`b⁻ >= 0`, `b⁺ > 0`).
    ConvDiv,
    /// `(12)` diverging, `(21)` converging (`b⁻ < 0`, `b⁺ <= 0`).
    DivConv,
    /// Both diverging (`b⁻ < 0 < b⁺`).
    DivDiv,
    /// `b⁻ = b⁺ = 0`: the difference process is driftless.
    DegenerateZero,
}

/// Two-particle classification together with the drift gaps.
#[derive(Clone, Debug)]
pub struct TwoParticleClassification<S> {
    pub class: Config2Class,
    pub b_minus: S,
    pub b_plus: S,
}

/// Classifies a two-particle specification (`n == 2` required).
pub fn classify_two_particle<S: Scalar>(
    spec: &DriftSpec<S>,
) -> Result<TwoParticleClassification<S>> {
    if spec.n() != 2 {
        return Err(Error::invalid(format!(
            "two-particle classification needs n = 2, got n = {}",
            spec.n()
        )));
    }
    let s12 = Permutation::identity(2);
    let s21 = Permutation::new(vec![1, 0]).unwrap();
    let d12 = spec.drift_vector(&s12);
    let d21 = spec.drift_vector(&s21);
    let b_minus = d12[0].clone() - d12[1].clone();
    let b_plus = d21[0].clone() - d21[1].clone();
    let zero = S::zero();
    let class = if b_minus == zero && b_plus == zero {
        Config2Class::DegenerateZero
    } else {
        match (b_minus >= zero, b_plus <= zero) {
            (true, true) => Config2Class::ConvConv,
            (true, false) => Config2Class::ConvDiv,
            (false, true) => Config2Class::DivConv,
            (false, false) => Config2Class::DivDiv,
        }
    };
    Ok(TwoParticleClassification {
        class,
        b_minus,
        b_plus,
    })
}

// ---------------------------------------------------------------------------
// JSON representation
// ---------------------------------------------------------------------------

/// On-disk form of a drift specification:
///
/// ```json
/// {"kind": "general", "n": 3, "table": {"123": [0.0, 1.0, -1.0], …}}
/// {"kind": "rank_based", "b": [1.0, 0.0, -1.0]}
/// ```
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftFile {
    General {
        n: usize,
        table: BTreeMap<String, Vec<f64>>,
    },
    RankBased {
        b: Vec<f64>,
    },
}

/// Largest `n` accepted for on-disk general tables (`n!` entries).
pub const MAX_TABLE_N: usize = 7;

/// Parses and validates a drift specification from JSON text. Parse errors
/// carry line/column positions; validation errors name the offending entry.
pub fn from_json_str(text: &str) -> Result<DriftSpec<f64>> {
    let file: DriftFile =
        serde_json::from_str(text).map_err(|e| Error::DriftFile(e.to_string()))?;
    spec_from_file(file)
}

fn spec_from_file(file: DriftFile) -> Result<DriftSpec<f64>> {
    match file {
        DriftFile::RankBased { b } => {
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::DriftFile("rank vector has non-finite entry".into()));
            }
            DriftSpec::rank_based(b).map_err(|e| Error::DriftFile(e.to_string()))
        }
        DriftFile::General { n, table } => {
            if !(1..=MAX_TABLE_N).contains(&n) {
                return Err(Error::DriftFile(format!(
                    "general tables support 1 <= n <= {MAX_TABLE_N}, got n = {n}"
                )));
            }
            let mut parsed = BTreeMap::new();
            for (word, v) in table {
                let sigma: Permutation = word
                    .parse()
                    .map_err(|e| Error::DriftFile(format!("key {word:?}: {e}")))?;
                if sigma.n() != n {
                    return Err(Error::DriftFile(format!(
                        "key {word:?} has length {} but n = {n}",
                        sigma.n()
                    )));
                }
                if v.len() != n {
                    return Err(Error::DriftFile(format!(
                        "entry {word:?} has {} velocities but n = {n}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::DriftFile(format!(
                        "entry {word:?} has a non-finite velocity"
                    )));
                }
                parsed.insert(sigma, v);
            }
            if parsed.len() != factorial(n) {
                return Err(Error::DriftFile(format!(
                    "table has {} entries, expected {}! = {}",
                    parsed.len(),
                    n,
                    factorial(n)
                )));
            }
            DriftSpec::general(parsed).map_err(|e| Error::DriftFile(e.to_string()))
        }
    }
}

/// Serializes a specification to the on-disk JSON form.
pub fn to_json_string(spec: &DriftSpec<f64>) -> String {
    let file = match &spec.repr {
        Repr::Rank(b) => DriftFile::RankBased { b: b.clone() },
        Repr::Table(t) => DriftFile::General {
            n: spec.n(),
            table: t
                .iter()
                .map(|(s, v)| (s.to_string(), v.clone()))
                .collect(),
        },
    };
    serde_json::to_string_pretty(&file).expect("drift serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordering::sigma_of;

    #[test]
    fn rank_based_places_velocities_by_rank() {
        let spec = DriftSpec::rank_based(vec![1.0, 0.0, -1.0]).unwrap();
        let s213: Permutation = "213".parse().unwrap();
        assert_eq!(spec.drift_vector(&s213), vec![0.0, 1.0, -1.0]);
        let s123 = Permutation::identity(3);
        assert_eq!(spec.drift_vector(&s123), vec![1.0, 0.0, -1.0]);
        // Single particle is allowed.
        let one = DriftSpec::rank_based(vec![5.0]).unwrap();
        assert_eq!(one.drift_vector(&Permutation::identity(1)), vec![5.0]);
    }

    #[test]
    fn projected_centers_every_ordering() {
        let spec = DriftSpec::rank_based(vec![3.0, 1.0, -1.0]).unwrap();
        let proj = spec.projected();
        assert_eq!(proj.rank_vector().unwrap(), &[2.0, 0.0, -2.0]);

        let spec = DriftSpec::two_particle([2.0f64, -1.0], [-3.0, 1.0]);
        let proj = spec.projected();
        for sigma in Permutation::all(2) {
            let v = proj.drift_vector(&sigma);
            assert!((v[0] + v[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn stability_of_decreasing_rank_vector() {
        let spec = DriftSpec::rank_based(vec![3.0f64, 1.0, -1.0]).unwrap();
        let rep = analyze_stability(&spec).unwrap();
        assert!(rep.satisfies_sc && rep.satisfies_ssc);
        assert!((rep.b_bar - 2.0).abs() < 1e-14);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn sc_violation_reported_with_location() {
        // b⁻ = -1 < 0: the (12) configuration diverges.
        let spec = DriftSpec::two_particle([-1.0, 0.0], [0.0, -1.0]);
        let rep = analyze_stability(&spec).unwrap();
        assert!(!rep.satisfies_sc);
        let v = &rep.violations[0];
        assert_eq!(v.sigma.to_string(), "12");
        assert_eq!(v.split, 1);
        assert!(v.left_avg < v.right_avg);
    }

    #[test]
    fn ssc_implies_sc_and_margin_sign_matches() {
        let cases = vec![
            vec![3.0, 1.0, -1.0],
            vec![1.0, 1.0, -2.0],
            vec![0.0, 0.0],
            vec![1.0, 2.0, 3.0],
            vec![1.0, 0.0, -1.0, 0.5],
        ];
        for b in cases {
            let rep = analyze_stability(&DriftSpec::rank_based(b.clone()).unwrap()).unwrap();
            assert!(!rep.satisfies_ssc || rep.satisfies_sc, "b = {b:?}");
            assert_eq!(rep.satisfies_ssc, rep.b_bar > 0.0, "b = {b:?}");
        }
    }

    #[test]
    fn rank_based_fast_path_matches_enumeration() {
        // n = 9 exceeds the enumeration limit; check against a hand prefix scan.
        let b: Vec<f64> = (0..9).map(|k| 4.0 - k as f64).collect();
        let spec = DriftSpec::rank_based(b.clone()).unwrap();
        let rep = analyze_stability(&spec).unwrap();
        let centered = crate::ordering::project_centered(&b);
        let mut min = f64::INFINITY;
        let mut acc = 0.0;
        for v in &centered[..8] {
            acc += v;
            min = min.min(acc);
        }
        assert!((rep.b_bar - min).abs() < 1e-12);
        assert!(rep.satisfies_ssc);
    }

    #[test]
    fn two_particle_classes() {
        use Config2Class::*;
        let classify = |b12: [f64; 2], b21: [f64; 2]| {
            classify_two_particle(&DriftSpec::two_particle(b12, b21)).unwrap()
        };
        let c = classify([-1.0, 0.0], [1.0, 0.0]);
        assert_eq!(c.class, DivDiv);
        assert_eq!((c.b_minus, c.b_plus), (-1.0, 1.0));
        assert_eq!(classify([2.0, -1.0], [-3.0, 1.0]).class, ConvConv);
        assert_eq!(classify([1.0, 0.0], [2.0, 0.0]).class, ConvDiv);
        assert_eq!(classify([-1.0, 0.0], [-2.0, 0.0]).class, DivConv);
        assert_eq!(classify([1.0, 1.0], [2.0, 2.0]).class, DegenerateZero);

        let err = classify_two_particle(&DriftSpec::rank_based(vec![1.0, 0.0, -1.0]).unwrap());
        assert!(err.is_err());
    }

    #[test]
    fn classification_is_consistent_with_sc_for_two_particles() {
        // For n = 2 the stability condition holds iff both configurations converge.
        let cases: Vec<([f64; 2], [f64; 2])> = vec![
            ([2.0, -1.0], [-3.0, 1.0]),
            ([-1.0, 0.0], [3.0, 0.0]),
            ([1.0, 0.0], [2.0, 0.0]),
            ([0.0, 0.0], [0.0, 0.0]),
        ];
        for (b12, b21) in cases {
            let spec = DriftSpec::two_particle(b12, b21);
            let rep = analyze_stability(&spec).unwrap();
            let class = classify_two_particle(&spec).unwrap().class;
            let conv_conv = matches!(
                class,
                Config2Class::ConvConv | Config2Class::DegenerateZero
            );
            assert_eq!(rep.satisfies_sc, conv_conv, "{b12:?} {b21:?}");
        }
    }

    #[test]
    fn drift_json_roundtrip_and_validation() {
        let text = r#"{"kind": "rank_based", "b": [1.0, 0.0, -1.0]}"#;
        let spec = from_json_str(text).unwrap();
        assert_eq!(spec.kind(), DriftKind::RankBased);
        assert_eq!(spec.n(), 3);

        let spec2 = from_json_str(&to_json_string(&spec)).unwrap();
        assert_eq!(spec2.rank_vector().unwrap(), spec.rank_vector().unwrap());

        let general = r#"{"kind":"general","n":2,"table":{"12":[2.0,-1.0],"21":[-3.0,1.0]}}"#;
        let spec = from_json_str(general).unwrap();
        assert_eq!(spec.kind(), DriftKind::General);
        let sigma = sigma_of(&[1.0, 0.0]);
        assert_eq!(spec.drift_vector(&sigma), vec![-3.0, 1.0]);

        // Missing entry.
        let bad = r#"{"kind":"general","n":2,"table":{"12":[2.0,-1.0]}}"#;
        assert!(from_json_str(bad).is_err());
        // Wrong arity.
        let bad = r#"{"kind":"general","n":2,"table":{"12":[2.0],"21":[-3.0,1.0]}}"#;
        assert!(from_json_str(bad).is_err());
        // Non-finite velocity.
        let bad = r#"{"kind":"rank_based","b":[1.0,null]}"#;
        assert!(from_json_str(bad).is_err());
        // Syntax errors carry positions.
        let err = from_json_str("{\n  \"kind\": }").unwrap_err();
        assert!(err.to_string().contains("line"));
    }
}
