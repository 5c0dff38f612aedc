//! Exact mixed *-moments as sums over adapted pair partitions.
//!
//! For words in `T`, `T*` (eta mode) every noncrossing pair partition whose
//! blocks join a starred and an unstarred letter with equal labels
//! contributes. A block whose left leg is starred compares its color with the
//! color of its nearest outer block through `g(x_k, x_o)`; a block with a
//! plain left leg uses the transpose `g(x_o, x_k)`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{adapted_partitions, AdaptMode, PairPartition, IMAGINARY};
use crate::rational::{self, Rational};
use crate::volumes::{poset_from_relations, poset_volume, Relation};
use crate::word::StarWord;
use crate::{factorial, Limits};

/// Step function on `[0,1]²`: value `v[p][q]` on `I_p × I_q`, where the
/// intervals `I_1, …, I_r` have the given widths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarianceProfile {
    widths: Vec<Rational>,
    values: Vec<Vec<Rational>>,
}

impl VarianceProfile {
    /// `widths = None` means uniform widths `1/r`.
    pub fn new(values: Vec<Vec<Rational>>, widths: Option<Vec<Rational>>) -> Result<Self> {
        let r = values.len();
        if r == 0 {
            return Err(Error::InvalidProfile("r must be positive".into()));
        }
        if values.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidProfile(format!("v must be {r}x{r}")));
        }
        if values.iter().flatten().any(|x| *x < Rational::zero()) {
            return Err(Error::InvalidProfile("negative variance".into()));
        }
        let widths = widths.unwrap_or_else(|| vec![rational::ratio(1, r as i64); r]);
        if widths.len() != r {
            return Err(Error::InvalidProfile(format!("expected {r} widths")));
        }
        if widths.iter().any(|w| *w <= Rational::zero()) {
            return Err(Error::InvalidProfile("widths must be positive".into()));
        }
        if widths.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::InvalidProfile("widths must sum to 1".into()));
        }
        Ok(VarianceProfile { widths, values })
    }

    /// `v[p][q] = 1` iff `p < q`: the grid approximation of `χ_{x<y}`.
    pub fn strict_upper_grid(r: usize) -> Self {
        Self::grid(r, |p, q| p < q)
    }

    /// All ones: reproduces `g ≡ 1` exactly at every resolution.
    pub fn ones(r: usize) -> Self {
        Self::grid(r, |_, _| true)
    }

    fn grid(r: usize, on: impl Fn(usize, usize) -> bool) -> Self {
        let values = (0..r)
            .map(|p| (0..r).map(|q| rational::int(on(p, q) as i64)).collect())
            .collect();
        VarianceProfile::new(values, None).expect("grid profile is valid")
    }

    pub fn r(&self) -> usize {
        self.widths.len()
    }

    pub fn widths(&self) -> &[Rational] {
        &self.widths
    }

    pub fn value(&self, p: usize, q: usize) -> &Rational {
        &self.values[p][q]
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProfileJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidProfile(e.to_string()))?;
        let values = raw
            .v
            .iter()
            .map(|row| row.iter().map(RatLit::parse).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let widths = raw
            .widths
            .map(|ws| ws.iter().map(RatLit::parse).collect::<Result<Vec<_>>>())
            .transpose()?;
        if values.len() != raw.r {
            return Err(Error::InvalidProfile(format!(
                "r = {} but v has {} rows",
                raw.r,
                values.len()
            )));
        }
        VarianceProfile::new(values, widths)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let lit = |q: &Rational| serde_json::Value::String(q.to_string());
        serde_json::json!({
            "r": self.r(),
            "widths": self.widths.iter().map(lit).collect::<Vec<_>>(),
            "v": self.values.iter().map(|row| row.iter().map(lit).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Deserialize)]
struct ProfileJson {
    r: usize,
    #[serde(default)]
    widths: Option<Vec<RatLit>>,
    v: Vec<Vec<RatLit>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RatLit {
    Str(String),
    Num(serde_json::Number),
}

impl RatLit {
    fn parse(&self) -> Result<Rational> {
        match self {
            RatLit::Str(s) => rational::parse(s),
            RatLit::Num(n) => rational::parse(&n.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OperatorSpec {
    /// `g = 1` on the whole square.
    Circular,
    /// `g = χ_{x<y}`.
    Triangular,
    /// `g = χ_{x>y}`.
    LowerTriangular,
    /// `|g|²` is the step function of the profile.
    Profile(VarianceProfile),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentResult {
    pub value: Rational,
    pub contributions: Vec<(PairPartition, Rational)>,
}

impl MomentResult {
    fn from_contributions(contributions: Vec<(PairPartition, Rational)>) -> Self {
        let value = contributions.iter().map(|(_, v)| v).sum();
        MomentResult {
            value,
            contributions,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let contributions: Vec<_> = self
            .contributions
            .iter()
            .map(|(p, v)| {
                serde_json::json!({
                    "partition": p,
                    "value": rational::to_json(v),
                })
            })
            .collect();
        serde_json::json!({
            "value": rational::to_json(&self.value),
            "contributions": contributions,
        })
    }
}

/// `φ(T^{ε1}(u1)…T^{εm}(um))` for the operator family given by `spec`.
///
/// Words without an adapted partition give 0; the empty word gives 1.
pub fn eta_moment(w: &StarWord, spec: &OperatorSpec, limits: &Limits) -> Result<MomentResult> {
    let parts = adapted_partitions(w, AdaptMode::Eta, limits)?;
    let contributions = parts
        .into_par_iter()
        .map(|p| {
            let v = eta_contribution(&p, w, spec, limits)?;
            Ok((p, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentResult::from_contributions(contributions))
}

fn eta_contribution(
    p: &PairPartition,
    w: &StarWord,
    spec: &OperatorSpec,
    limits: &Limits,
) -> Result<Rational> {
    let left_starred = |k: usize| w.at(p.block(k).0).starred;
    match spec {
        OperatorSpec::Circular => Ok(Rational::one()),
        OperatorSpec::Triangular | OperatorSpec::LowerTriangular => {
            let lower = matches!(spec, OperatorSpec::LowerTriangular);
            let q = poset_from_relations(p, |k| {
                Some(if left_starred(k) != lower {
                    Relation::Below
                } else {
                    Relation::Above
                })
            })
            .expect("every block has a relation");
            poset_volume(&q, limits)
        }
        OperatorSpec::Profile(prof) => Ok(profile_weight(p, prof, left_starred)),
    }
}

/// Sum over colorings `c: {0..s} → [r]` of the block weights times the
/// interval widths, folded bottom-up over the nesting forest.
fn profile_weight(
    p: &PairPartition,
    prof: &VarianceProfile,
    left_starred: impl Fn(usize) -> bool,
) -> Rational {
    let r = prof.r();
    let s = p.s();
    // below[k][c]: weight of the subtree under k given color c at k, widths included.
    // Children always have larger indices than their outer block.
    let mut below: Vec<Vec<Rational>> = vec![prof.widths.clone(); s + 1];
    for k in (1..=s).rev() {
        let o = p.outer(k);
        let starred = left_starred(k);
        let sub = std::mem::take(&mut below[k]);
        for co in 0..r {
            let mut acc = Rational::zero();
            for (ck, f) in sub.iter().enumerate() {
                if f.is_zero() {
                    continue;
                }
                let wgt = if starred {
                    prof.value(ck, co)
                } else {
                    prof.value(co, ck)
                };
                if !wgt.is_zero() {
                    acc += wgt * f;
                }
            }
            below[o][co] *= acc;
        }
    }
    below[IMAGINARY].iter().sum()
}

/// Direct sum over all `r^{s+1}` colorings. Oracle for the profile moment;
/// exponential in the number of blocks.
pub fn profile_coloring_oracle(
    p: &PairPartition,
    w: &StarWord,
    prof: &VarianceProfile,
) -> Rational {
    let r = prof.r();
    let s = p.s();
    let mut colors = vec![0usize; s + 1];
    let mut total = Rational::zero();
    loop {
        let mut term: Rational = colors.iter().map(|&c| &prof.widths[c]).product();
        for k in 1..=s {
            if term.is_zero() {
                break;
            }
            let (ck, co) = (colors[k], colors[p.outer(k)]);
            let wgt = if w.at(p.block(k).0).starred {
                prof.value(ck, co)
            } else {
                prof.value(co, ck)
            };
            term *= wgt;
        }
        total += term;
        // odometer
        let mut i = 0;
        loop {
            if i > s {
                return total;
            }
            colors[i] += 1;
            if colors[i] < r {
                break;
            }
            colors[i] = 0;
            i += 1;
        }
    }
}

/// Support of a position's function in a creation/annihilation word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// The whole square.
    Full,
    /// `{(x, y): x < y}`.
    Upper,
    /// `{(x, y): x > y}`.
    Lower,
    Empty,
}

impl Region {
    pub fn intersect(self, other: Region) -> Region {
        use Region::*;
        match (self, other) {
            (Full, x) | (x, Full) => x,
            (Upper, Upper) => Upper,
            (Lower, Lower) => Lower,
            _ => Empty,
        }
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Region::Full),
            "upper" | "triangle" => Ok(Region::Upper),
            "lower" => Ok(Region::Lower),
            "empty" => Ok(Region::Empty),
            _ => Err(Error::Parse(format!("unknown region {s:?}"))),
        }
    }
}

/// `φ(℘^{ε1}(f1)…℘^{εm}(fm))` where `f_i = χ_{regions[i]} ⊗ e(u_i)`.
///
/// At most one partition is adapted in creation mode; its value is the volume
/// of the region where every block's color pair lies in both legs' supports.
pub fn creation_moment(w: &StarWord, regions: &[Region], limits: &Limits) -> Result<Rational> {
    if regions.len() != w.len() {
        return Err(Error::LengthMismatch {
            partition: regions.len(),
            word: w.len(),
        });
    }
    let parts = adapted_partitions(w, AdaptMode::Creation, limits)?;
    let Some(p) = parts.first() else {
        return Ok(Rational::zero());
    };
    let q = poset_from_relations(p, |k| {
        let (l, r) = p.block(k);
        match regions[l - 1].intersect(regions[r - 1]) {
            Region::Full => Some(Relation::Free),
            Region::Upper => Some(Relation::Below),
            Region::Lower => Some(Relation::Above),
            Region::Empty => None,
        }
    });
    match q {
        Some(q) => poset_volume(&q, limits),
        None => Ok(Rational::zero()),
    }
}

/// `n^n / (n+1)!`.
pub fn triangular_moment_closed_form(n: usize) -> Rational {
    let num = num_traits::pow(BigInt::from(n), n);
    Rational::new(num, BigInt::from(factorial(n + 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Triangular,
    Circular,
}

/// Moments of the `r × r` grid profiles approximating `kind`, one per
/// resolution in `rs`.
pub fn profile_refinement_sequence(
    w: &StarWord,
    kind: GridKind,
    rs: &[usize],
    limits: &Limits,
) -> Result<Vec<(usize, Rational)>> {
    rs.iter()
        .map(|&r| {
            if r == 0 {
                return Err(Error::InvalidProfile("r must be positive".into()));
            }
            let prof = match kind {
                GridKind::Triangular => VarianceProfile::strict_upper_grid(r),
                GridKind::Circular => VarianceProfile::ones(r),
            };
            let res = eta_moment(w, &OperatorSpec::Profile(prof), limits)?;
            Ok((r, res.value))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_nc2;
    use crate::rational::{int, ratio};
    use crate::word::StarLetter;

    fn lim() -> Limits {
        Limits::default()
    }

    fn w(s: &str) -> StarWord {
        s.parse().unwrap()
    }

    fn tri(word: &StarWord) -> MomentResult {
        eta_moment(word, &OperatorSpec::Triangular, &lim()).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(triangular_moment_closed_form(1), ratio(1, 2));
        assert_eq!(triangular_moment_closed_form(2), ratio(2, 3));
        assert_eq!(triangular_moment_closed_form(3), ratio(9, 8));
        assert_eq!(triangular_moment_closed_form(4), ratio(32, 15));
        assert_eq!(triangular_moment_closed_form(5), ratio(625, 144));
    }

    #[test]
    fn triangular_examples() {
        assert_eq!(tri(&w("*1,1")).value, ratio(1, 2));
        let res = tri(&StarWord::tt_power(3));
        assert_eq!(res.value, ratio(9, 8));
        let mut got: Vec<_> = res.contributions.iter().map(|(_, v)| v.clone()).collect();
        got.sort();
        let mut want = [5, 6, 5, 5, 6].map(|c| ratio(c, 24)).to_vec();
        want.sort();
        assert_eq!(got, want);
        assert_eq!(tri(&w("1,1")).value, int(0));
        assert!(tri(&w("1,1")).contributions.is_empty());
        assert_eq!(tri(&w("*1,1,1")).value, int(0));
        assert_eq!(tri(&StarWord::default()).value, int(1));
    }

    #[test]
    fn triangular_matches_closed_form() {
        for n in 1..=7 {
            assert_eq!(
                tri(&StarWord::tt_power(n)).value,
                triangular_moment_closed_form(n)
            );
        }
    }

    #[test]
    fn simplex_accounting() {
        // Σ linear extensions = n^n, i.e. moment × (n+1)! = n^n
        for n in 1..=6 {
            let total =
                tri(&StarWord::tt_power(n)).value * Rational::from_integer(factorial(n + 1).into());
            assert_eq!(total, Rational::from_integer(BigInt::from(n).pow(n as u32)));
        }
    }

    #[test]
    fn circular_is_catalan() {
        for n in 0..=7 {
            let res = eta_moment(&StarWord::tt_power(n), &OperatorSpec::Circular, &lim()).unwrap();
            assert_eq!(res.value, Rational::from_integer(crate::catalan(n).into()));
        }
    }

    #[test]
    fn lower_triangular_is_mirror() {
        // T_lower = T* in distribution of words: swap stars
        for word in [
            w("*1,1"),
            w("*1,1,*1,1"),
            w("*1,*1,1,1"),
            w("1,*1,*1,1,*1,1"),
        ] {
            let lower = eta_moment(&word, &OperatorSpec::LowerTriangular, &lim()).unwrap();
            let flipped = StarWord::new(word.letters().iter().map(|l| l.adjoint()).collect());
            assert_eq!(lower.value, tri(&flipped).value);
        }
    }

    #[test]
    fn profile_anchor() {
        let prof = VarianceProfile::new(
            vec![vec![int(0), int(1)], vec![int(0), int(0)]],
            Some(vec![ratio(1, 2), ratio(1, 2)]),
        )
        .unwrap();
        let res = eta_moment(&w("*1,1"), &OperatorSpec::Profile(prof), &lim()).unwrap();
        assert_eq!(res.value, ratio(1, 4));
    }

    #[test]
    fn refinement_examples() {
        let seq =
            profile_refinement_sequence(&w("*1,1"), GridKind::Triangular, &[1, 2, 4, 8], &lim())
                .unwrap();
        for (r, v) in &seq {
            assert_eq!(*v, ratio(*r as i64 - 1, 2 * *r as i64));
        }
        assert_eq!(seq[2].1, ratio(3, 8));
        for (_, v) in
            profile_refinement_sequence(&w("*1,1"), GridKind::Circular, &[1, 3, 7], &lim()).unwrap()
        {
            assert_eq!(v, int(1));
        }
    }

    #[test]
    fn refinement_second_moment_against_oracle() {
        let word = StarWord::tt_power(2);
        let prof = VarianceProfile::strict_upper_grid(2);
        let parts = adapted_partitions(&word, AdaptMode::Eta, &lim()).unwrap();
        let oracle: Rational = parts
            .iter()
            .map(|p| profile_coloring_oracle(p, &word, &prof))
            .sum();
        let seq = profile_refinement_sequence(&word, GridKind::Triangular, &[2], &lim()).unwrap();
        assert_eq!(seq[0].1, oracle);
        // below the continuous value, and approaching it
        assert!(oracle < ratio(2, 3));
        let finer =
            profile_refinement_sequence(&word, GridKind::Triangular, &[2, 4, 8, 16], &lim())
                .unwrap();
        for pair in finer.windows(2) {
            assert!(pair[0].1 <= pair[1].1);
            assert!(pair[1].1 <= ratio(2, 3));
        }
    }

    #[test]
    fn profile_dp_matches_brute_force_coloring() {
        let profiles = [
            VarianceProfile::new(
                vec![vec![int(0), int(1)], vec![int(0), int(0)]],
                Some(vec![ratio(1, 2), ratio(1, 2)]),
            )
            .unwrap(),
            VarianceProfile::new(
                vec![
                    vec![ratio(1, 3), int(2), int(0)],
                    vec![ratio(5, 7), int(1), ratio(1, 2)],
                    vec![int(0), ratio(3, 2), int(4)],
                ],
                Some(vec![ratio(1, 6), ratio(1, 2), ratio(1, 3)]),
            )
            .unwrap(),
            VarianceProfile::strict_upper_grid(3),
        ];
        let words = [
            StarWord::tt_power(4),
            w("*1,*1,1,1,*1,1,1,*1"),
            w("1,*1,*2,2,1,*1"),
        ];
        for prof in &profiles {
            for word in &words {
                let res = eta_moment(word, &OperatorSpec::Profile(prof.clone()), &lim()).unwrap();
                for (p, v) in &res.contributions {
                    assert_eq!(*v, profile_coloring_oracle(p, word, prof), "{p} {word}");
                }
            }
        }
    }

    #[test]
    fn label_mismatch_gives_zero() {
        for word in [w("*1,2"), w("*1,1,*2,1"), w("*1,*2,1,2")] {
            for spec in [OperatorSpec::Triangular, OperatorSpec::Circular] {
                assert_eq!(eta_moment(&word, &spec, &lim()).unwrap().value, int(0));
            }
        }
        // two labels that can be matched give a nonzero value
        assert!(tri(&w("*1,*2,2,1")).value > int(0));
    }

    #[test]
    fn adjoint_symmetry() {
        // every star/label word over {1,2} up to length 8
        for m in (0..=8).step_by(2) {
            for code in 0..(1usize << (2 * m)) {
                let word = StarWord::new(
                    (0..m)
                        .map(|i| {
                            let b = (code >> (2 * i)) & 3;
                            StarLetter {
                                starred: b & 1 == 1,
                                label: 1 + (b >> 1) as u32,
                            }
                        })
                        .collect(),
                );
                if m == 8 && code % 7 != 0 {
                    continue;
                }
                assert_eq!(tri(&word).value, tri(&word.adjoint()).value, "{word}");
            }
        }
    }

    #[test]
    fn contribution_order_is_canonical() {
        let res = tri(&StarWord::tt_power(4));
        let parts: Vec<_> = res.contributions.iter().map(|(p, _)| p.clone()).collect();
        assert_eq!(parts, enumerate_nc2(8, &lim()).unwrap());
    }

    #[test]
    fn creation_examples() {
        let up = [Region::Upper; 6];
        let chain = w("*1,*1,*1,1,1,1");
        assert_eq!(creation_moment(&chain, &up, &lim()).unwrap(), ratio(1, 24));
        let fork = w("*1,*1,1,*1,1,1");
        assert_eq!(creation_moment(&fork, &up, &lim()).unwrap(), ratio(1, 12));
        // no creation-adapted partition
        assert_eq!(
            creation_moment(&w("1,*1"), &[Region::Upper; 2], &lim()).unwrap(),
            int(0)
        );
        // different labels on the two legs
        assert_eq!(
            creation_moment(&w("*1,2"), &[Region::Upper; 2], &lim()).unwrap(),
            int(0)
        );
        // disjoint supports on one block
        let mixed = [Region::Upper, Region::Lower];
        assert_eq!(creation_moment(&w("*1,1"), &mixed, &lim()).unwrap(), int(0));
        assert_eq!(
            creation_moment(&w("*1,1"), &[Region::Full, Region::Full], &lim()).unwrap(),
            int(1)
        );
        assert!(creation_moment(&chain, &up[..4], &lim()).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(VarianceProfile::new(vec![], None).is_err());
        assert!(VarianceProfile::new(vec![vec![int(1), int(1)]], None).is_err());
        assert!(VarianceProfile::new(vec![vec![int(-1)]], None).is_err());
        assert!(VarianceProfile::new(vec![vec![int(1)]], Some(vec![ratio(1, 2)])).is_err());
        assert!(VarianceProfile::new(
            vec![vec![int(1), int(1)], vec![int(1), int(1)]],
            Some(vec![int(0), int(1)])
        )
        .is_err());
    }

    #[test]
    fn profile_json() {
        let p = VarianceProfile::from_json(r#"{"r": 2, "v": [["0", "1"], ["0", "0"]]}"#).unwrap();
        assert_eq!(p.widths(), &[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(p.value(0, 1), &int(1));
        let q = VarianceProfile::from_json(
            r#"{"r": 2, "widths": ["1/3", "2/3"], "v": [[0, "1/2"], [0.5, 0]]}"#,
        )
        .unwrap();
        assert_eq!(q.value(1, 0), &ratio(1, 2));
        let back = VarianceProfile::from_json(&q.to_json().to_string()).unwrap();
        assert_eq!(back, q);
        assert!(VarianceProfile::from_json(r#"{"r": 3, "v": [["1"]]}"#).is_err());
        assert!(VarianceProfile::from_json(r#"{"r": 1, "v": [["x"]]}"#).is_err());
    }

    #[test]
    fn moment_json() {
        let j = tri(&StarWord::tt_power(3)).to_json();
        assert_eq!(j["value"], serde_json::json!({"num": "9", "den": "8"}));
        assert_eq!(j["contributions"].as_array().unwrap().len(), 5);
        assert_eq!(
            j["contributions"][4],
            serde_json::json!({"partition": [[1, 6], [2, 5], [3, 4]], "value": {"num": "5", "den": "24"}})
        );
    }
}
