//! Orderings of particle configurations.
//!
//! A configuration `x ∈ R^n` is summarized by the permutation `Σx` sorting it:
//! the lexicographically smallest word `σ` with
//! `x_{σ(1)} <= x_{σ(2)} <= … <= x_{σ(n)}`. Ties are broken towards the
//! smaller particle index, which makes [`sigma_of`] a deterministic,
//! stable-sort argsort. [`sigma_set`] enumerates every ordering compatible
//! with a configuration up to a tie tolerance, and [`project_centered`] maps a
//! configuration to the zero-mean hyperplane on which the centered dynamics
//! live.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A permutation of `{0, …, n-1}` stored as its one-line word:
/// `word()[k]` is the (0-based) index of the particle holding rank `k`.
///
/// The display form is the 1-based word, e.g. `"231"` for the permutation
/// placing particle 2 first, particle 3 second and particle 1 last; words of
/// more than nine symbols are rendered dash-separated (`"10-2-…"`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    word: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from its 0-based word, validating bijectivity.
    pub fn new(word: Vec<usize>) -> Result<Self> {
        let n = word.len();
        let mut seen = vec![false; n];
        for &v in &word {
            if v >= n || seen[v] {
                return Err(Error::invalid(format!(
                    "word {word:?} is not a permutation of 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { word })
    }

    /// The identity word `(1 2 … n)`.
    pub fn identity(n: usize) -> Self {
        Permutation {
            word: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.word.len()
    }

    /// The 0-based one-line word.
    pub fn word(&self) -> &[usize] {
        &self.word
    }

    /// Rank held by `particle` (0-based on both sides).
    pub fn rank_of(&self, particle: usize) -> usize {
        self.word
            .iter()
            .position(|&p| p == particle)
            .expect("particle index out of range")
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0usize; self.word.len()];
        for (rank, &particle) in self.word.iter().enumerate() {
            inv[particle] = rank;
        }
        Permutation { word: inv }
    }

    /// Functional composition: `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::invalid("composing permutations of different sizes"));
        }
        Ok(Permutation {
            word: other.word.iter().map(|&k| self.word[k]).collect(),
        })
    }

    /// Gathers `x` into rank order: element `k` of the result is `x[σ(k)]`.
    pub fn gather<T: Clone>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n(), "dimension mismatch");
        self.word.iter().map(|&i| x[i].clone()).collect()
    }

    /// All permutations of `{0,…,n-1}` in lexicographic word order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (0..n).permutations(n).map(|word| Permutation { word })
    }

    /// Lexicographic index of this word among all `n!` words.
    pub fn lehmer_rank(&self) -> usize {
        lehmer_rank_of(&self.word)
    }

    /// Inverse of [`Permutation::lehmer_rank`].
    pub fn from_lehmer(n: usize, mut rank: usize) -> Result<Self> {
        let total = factorial(n);
        if rank >= total {
            return Err(Error::invalid(format!("lehmer rank {rank} out of range")));
        }
        let mut pool: Vec<usize> = (0..n).collect();
        let mut word = Vec::with_capacity(n);
        for k in 0..n {
            let f = factorial(n - 1 - k);
            let idx = rank / f;
            rank %= f;
            word.push(pool.remove(idx));
        }
        Ok(Permutation { word })
    }
}

/// Lexicographic index of a (valid) 0-based word; does not validate.
pub fn lehmer_rank_of(word: &[usize]) -> usize {
    let n = word.len();
    let mut rank = 0usize;
    for k in 0..n {
        let smaller_later = word[k + 1..].iter().filter(|&&v| v < word[k]).count();
        rank += smaller_later * factorial(n - 1 - k);
    }
    rank
}

/// `n!` (panics on overflow; orderings are only enumerated for small `n`).
pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n() <= 9 {
            for &v in &self.word {
                write!(f, "{}", v + 1)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.word.iter().map(|&v| (v + 1).to_string()).collect();
            write!(f, "{}", parts.join("-"))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_part = |p: &str| -> Result<usize> {
            let v: usize = p
                .parse()
                .map_err(|_| Error::invalid(format!("bad permutation word {s:?}")))?;
            if v == 0 {
                return Err(Error::invalid(format!(
                    "permutation word {s:?} uses 1-based symbols"
                )));
            }
            Ok(v - 1)
        };
        let word: Vec<usize> = if s.contains('-') {
            s.split('-').map(parse_part).collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| parse_part(&c.to_string()))
                .collect::<Result<_>>()?
        };
        Permutation::new(word)
    }
}

/// The sorting permutation `Σx`: the lexicographically smallest word sorting
/// `x` in nondecreasing order. Equal coordinates are ranked by particle index,
/// so the result is the stable argsort of `x`.
pub fn sigma_of<S: Scalar>(x: &[S]) -> Permutation {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b])
            .expect("coordinates must be comparable")
            .then(a.cmp(&b))
    });
    Permutation { word: idx }
}

/// All orderings compatible with `x` when coordinates within `tol` of each
/// other are treated as tied: the words `σ` with
/// `x_{σ(k)} - x_{σ(k+1)} <= tol` for every consecutive pair. With `tol = 0`
/// this is the set of exact sorting words. Enumeration is `O(n! · n)`.
pub fn sigma_set<S: Scalar>(x: &[S], tol: &S) -> Vec<Permutation> {
    assert!(*tol >= S::zero(), "tie tolerance must be nonnegative");
    Permutation::all(x.len())
        .filter(|sigma| {
            sigma.word.windows(2).all(|w| {
                let diff = x[w[0]].clone() - x[w[1]].clone();
                diff <= *tol
            })
        })
        .collect()
}

/// Whether some pair of coordinates is within `tol` of each other.
pub fn in_coincidence_set<S: Scalar>(x: &[S], tol: &S) -> bool {
    assert!(*tol >= S::zero(), "tolerance must be nonnegative");
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
    sorted
        .windows(2)
        .any(|w| w[1].clone() - w[0].clone() <= *tol)
}

/// Orthogonal projection onto the zero-mean hyperplane: `x - mean(x)·1`.
pub fn project_centered<S: Scalar>(x: &[S]) -> Vec<S> {
    if x.is_empty() {
        return Vec::new();
    }
    let sum = x.iter().cloned().fold(S::zero(), |a, v| a + v);
    let mean = sum / S::from_count(x.len());
    x.iter().map(|v| v.clone() - mean.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word_str(p: &Permutation) -> String {
        p.to_string()
    }

    #[test]
    fn sigma_of_sorts_with_index_tiebreak() {
        assert_eq!(word_str(&sigma_of(&[3.0, 1.0, 2.0])), "231");
        assert_eq!(word_str(&sigma_of(&[5.0, 5.0, 1.0])), "312");
        assert_eq!(word_str(&sigma_of(&[0.0f64; 4])), "1234");
    }

    /// Independent route: filter all words by the sortedness predicate and
    /// take the lexicographic minimum.
    #[test]
    fn sigma_of_matches_enumeration_oracle() {
        let cases: Vec<Vec<f64>> = vec![
            vec![0.3, -1.0, 0.3, 2.0],
            vec![1.0, 1.0, 1.0],
            vec![2.0, -2.0],
            vec![0.0, -0.5, 0.25, -0.5, 0.0],
        ];
        for x in cases {
            let expected = Permutation::all(x.len())
                .filter(|s| s.gather(&x).windows(2).all(|w| w[0] <= w[1]))
                .min()
                .unwrap();
            assert_eq!(sigma_of(&x), expected, "x = {x:?}");
        }
    }

    #[test]
    fn sigma_set_enumerates_tied_orderings() {
        let set = sigma_set(&[0.0, 0.0, 1.0], &0.0);
        let words: Vec<String> = set.iter().map(word_str).collect();
        assert_eq!(words, vec!["123", "213"]);

        // Chained ties: consecutive gaps within tol, endpoints not.
        let set = sigma_set(&[0.0, 0.5, 1.0], &0.6);
        assert!(set.iter().any(|s| word_str(s) == "321"));

        let set = sigma_set(&[1.0, 2.0], &0.0);
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn sigma_set_always_contains_sigma_of() {
        let xs: Vec<Vec<f64>> = vec![vec![1.0, -1.0, 1.0], vec![0.0, 0.0, 0.0, 0.0]];
        for x in xs {
            let set = sigma_set(&x, &0.0);
            assert!(set.contains(&sigma_of(&x)));
        }
    }

    #[test]
    fn coincidence_set_detects_close_pairs() {
        assert!(in_coincidence_set(&[0.0, 1.0, 1.05], &0.1));
        assert!(!in_coincidence_set(&[0.0, 1.0, 2.0], &0.5));
        assert!(in_coincidence_set(&[3.0, 3.0], &0.0));
    }

    #[test]
    fn centering_projection() {
        assert_eq!(project_centered(&[3.0, 0.0, 0.0]), vec![2.0, -1.0, -1.0]);
        // Idempotent.
        let x = vec![0.25f64, -1.75, 3.5, 1.0];
        let once = project_centered(&x);
        let twice = project_centered(&once);
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-15);
        }
        // Exact for rationals.
        use num_rational::Rational64;
        let r = |n, d| Rational64::new(n, d);
        let z = project_centered(&[r(1, 2), r(1, 3), r(1, 6)]);
        assert_eq!(z.iter().cloned().sum::<Rational64>(), r(0, 1));
    }

    #[test]
    fn word_roundtrip_and_algebra() {
        let p: Permutation = "231".parse().unwrap();
        assert_eq!(p.word(), &[1, 2, 0]);
        assert_eq!(p.to_string(), "231");
        assert_eq!(p.compose(&p.inverse()).unwrap(), Permutation::identity(3));
        assert_eq!(p.inverse().compose(&p).unwrap(), Permutation::identity(3));
        assert!("22".parse::<Permutation>().is_err());
        assert!("103".parse::<Permutation>().is_err());

        // Large words use the dash form.
        let big = Permutation::identity(11);
        let s = big.to_string();
        assert!(s.starts_with("1-2-3"));
        assert_eq!(s.parse::<Permutation>().unwrap(), big);
    }

    #[test]
    fn lehmer_rank_roundtrip() {
        for n in 0..6 {
            for (r, p) in Permutation::all(n).enumerate() {
                assert_eq!(p.lehmer_rank(), r);
                assert_eq!(Permutation::from_lehmer(n, r).unwrap(), p);
            }
        }
    }

    #[test]
    fn rank_of_is_inverse_word() {
        let p: Permutation = "3142".parse().unwrap();
        for particle in 0..4 {
            assert_eq!(p.word()[p.rank_of(particle)], particle);
        }
    }
}
