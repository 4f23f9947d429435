//! Exact successive-cancellation analysis on the binary erasure channel.
//!
//! Under erasures, what the decoder knows about a window of `w <= 3` lines is
//! a subspace of linear forms on those lines whose values are determined. For
//! `w = 3` there are 16 such subspaces. Every block at a given level sees the
//! same statistics, so one distribution over states per `(level, window)`
//! suffices and the analysis costs about as much as a single decode.

mod tables;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::circuit::GateList;
use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::scdecode::{Kernel, KernelKind, Plan};

pub use tables::{TRIPLE_LEFT, TRIPLE_RIGHT};

/// The 16 three-line states as spanning rows, in table order. A row
/// `[1, 0, 1]` is the form `x1 + x3`.
const TRIPLE_BASES: [&[[u8; 3]]; 16] = [
    &[],
    &[[1, 0, 0]],
    &[[0, 1, 0]],
    &[[0, 0, 1]],
    &[[1, 1, 0]],
    &[[1, 0, 1]],
    &[[0, 1, 1]],
    &[[1, 1, 1]],
    &[[1, 0, 0], [0, 1, 0]],
    &[[1, 0, 0], [0, 0, 1]],
    &[[0, 1, 0], [0, 0, 1]],
    &[[1, 0, 0], [0, 1, 1]],
    &[[0, 1, 0], [1, 0, 1]],
    &[[0, 0, 1], [1, 1, 0]],
    &[[1, 1, 0], [0, 1, 1]],
    &[[1, 0, 0], [0, 1, 0], [0, 0, 1]],
];

/// Closure of a set of generators, as a membership mask over `2^width` forms.
fn span_mask(gens: impl IntoIterator<Item = u8>) -> u8 {
    let mut mask = 1u8; // the zero form
    for g in gens {
        let mut add = 0u8;
        for v in 0..8u8 {
            if mask >> v & 1 == 1 {
                add |= 1 << (v ^ g);
            }
        }
        mask |= add;
    }
    mask
}

fn form_of_row(row: &[u8]) -> u8 {
    row.iter().enumerate().fold(0, |acc, (k, &b)| acc | (b << k))
}

/// Membership masks of every subspace of width `w`, in state-id order.
fn states(width: usize) -> &'static [u8] {
    static TABLES: OnceLock<[Vec<u8>; 4]> = OnceLock::new();
    &TABLES.get_or_init(|| {
        let triples = TRIPLE_BASES
            .iter()
            .map(|rows| span_mask(rows.iter().map(|r| form_of_row(r))))
            .collect();
        [
            vec![1],
            vec![0b01, 0b11],
            vec![span_mask([]), span_mask([1]), span_mask([2]), span_mask([3]), span_mask([1, 2])],
            triples,
        ]
    })[width]
}

fn state_index(width: usize, mask: u8) -> usize {
    states(width)
        .iter()
        .position(|&m| m == mask)
        .expect("every subspace has a state id")
}

/// Number of knowledge states over `width` lines.
pub fn state_count(width: usize) -> usize {
    states(width).len()
}

/// A knowledge state over three lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeState {
    /// 1-based id in table order.
    pub id: usize,
    /// Reduced row-echelon basis of the known forms.
    pub canonical: Gf2Matrix,
}

impl KnowledgeState {
    pub fn from_id(id: usize) -> Result<Self> {
        if !(1..=16).contains(&id) {
            return Err(Error::InvalidArgument(format!("state id {id} outside 1..=16")));
        }
        let rows = TRIPLE_BASES[id - 1];
        let m = if rows.is_empty() {
            Gf2Matrix::empty(3)
        } else {
            Gf2Matrix::from_rows(rows)?
        };
        Ok(KnowledgeState {
            id,
            canonical: m.rref().0,
        })
    }

    pub fn rank(&self) -> usize {
        self.canonical.rows()
    }

    /// Membership mask over the eight forms on three lines.
    pub fn mask(&self) -> u8 {
        states(3)[self.id - 1]
    }
}

/// Identifies the state spanned by the rows of a 3-column matrix.
pub fn canonicalize(c: &Gf2Matrix) -> Result<KnowledgeState> {
    if c.cols() != 3 {
        return Err(Error::Dimension(format!("knowledge matrices have 3 columns, got {}", c.cols())));
    }
    let mask = span_mask((0..c.rows()).map(|r| form_of_row(&c.row(r).iter().map(u8::from).collect::<Vec<_>>())));
    KnowledgeState::from_id(state_index(3, mask) + 1)
}

/// How a kernel maps input state pairs to an output state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelTransform {
    pub kind: KernelKind,
    pub in_width: usize,
    pub out_width: usize,
    /// `map[a][b]`: 0-based output state for 0-based input states.
    pub map: Vec<Vec<u8>>,
}

impl KernelTransform {
    pub fn for_kernel(k: &Kernel) -> Self {
        let (_, cl) = k.child;
        let map = transform_map(k.len, k.hidden, &k.a_forms[..cl], &k.b_forms[..cl]);
        KernelTransform {
            kind: k.kind,
            in_width: cl,
            out_width: k.len,
            map,
        }
    }

    /// Pushes two independent state distributions through the kernel.
    pub fn apply(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; state_count(self.out_width)];
        for (ia, pa) in a.iter().enumerate() {
            if *pa == 0.0 {
                continue;
            }
            for (ib, pb) in b.iter().enumerate() {
                out[self.map[ia][ib] as usize] += pa * pb;
            }
        }
        out
    }
}

/// Output state for each input pair, given each child-window line as a form
/// over (window lines, then hidden tops).
pub fn transform_map(len: usize, hidden: usize, a_forms: &[u16], b_forms: &[u16]) -> Vec<Vec<u8>> {
    assert!(len + hidden <= 16);
    let wa = a_forms.len();
    let wb = b_forms.len();
    let image = |forms: &[u16], f: u8| -> u16 {
        forms
            .iter()
            .enumerate()
            .filter(|(k, _)| f >> k & 1 == 1)
            .fold(0, |acc, (_, g)| acc ^ g)
    };
    let window_mask: u16 = (1 << len) - 1;
    let mut map = vec![vec![0u8; state_count(wb)]; state_count(wa)];
    for (ia, &ma) in states(wa).iter().enumerate() {
        for (ib, &mb) in states(wb).iter().enumerate() {
            let gens = (0..8u8)
                .filter(|f| ma >> f & 1 == 1)
                .map(|f| image(a_forms, f))
                .chain((0..8u8).filter(|f| mb >> f & 1 == 1).map(|f| image(b_forms, f)));
            // eliminate hidden variables first so the hidden-free part of the
            // span is spanned by the reduced vectors without hidden bits
            let mut basis: Vec<u16> = Vec::new();
            for g in gens {
                let mut v = g;
                for &b in &basis {
                    if v ^ b < v {
                        v ^= b;
                    }
                }
                if v != 0 {
                    basis.push(v);
                    basis.sort_unstable_by(|x, y| y.cmp(x));
                }
            }
            // with hidden bits above window bits, leading-bit reduction puts
            // every vector with a hidden pivot ahead of the hidden-free ones
            let visible = basis
                .iter()
                .filter(|&&v| v & !window_mask == 0)
                .map(|&v| v as u8);
            map[ia][ib] = state_index(len, span_mask(visible)) as u8;
        }
    }
    map
}

/// Output state of a bulk or boundary kernel on 3-line states.
pub fn kernel_transform(kind: KernelKind, a: &KnowledgeState, b: &KnowledgeState) -> Result<KnowledgeState> {
    let (family, m, s) = kind.canonical();
    let t = KernelTransform::for_kernel(&Kernel::compile(family, m, s));
    if t.in_width != 3 || t.out_width != 3 {
        return Err(Error::InvalidArgument(format!("{kind:?} does not map 3-line states to 3-line states")));
    }
    KnowledgeState::from_id(t.map[a.id - 1][b.id - 1] as usize + 1)
}

/// One disagreement between a computed and a tabulated transform.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMismatch {
    pub kind: KernelKind,
    pub a: usize,
    pub b: usize,
    pub expected: usize,
    pub computed: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub checked: usize,
    pub matched: usize,
    pub mismatches: Vec<TableMismatch>,
}

impl TableReport {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty() && self.checked == self.matched
    }
}

/// Compares a computed `map` against a tabulated one.
pub fn compare_table(kind: KernelKind, map: &[Vec<u8>], table: &[[u8; 16]; 16]) -> TableReport {
    let mut report = TableReport::default();
    for a in 0..16 {
        for b in 0..16 {
            report.checked += 1;
            let computed = map[a][b] as usize + 1;
            let expected = table[a][b] as usize;
            if computed == expected {
                report.matched += 1;
            } else {
                report.mismatches.push(TableMismatch {
                    kind,
                    a: a + 1,
                    b: b + 1,
                    expected,
                    computed,
                });
            }
        }
    }
    report
}

/// Regenerates both bulk tables from the circuit and compares them with the
/// shipped ones.
pub fn verify_tables() -> TableReport {
    let mut total = TableReport::default();
    for (kind, table) in [(KernelKind::TripleLeft, &TRIPLE_LEFT), (KernelKind::TripleRight, &TRIPLE_RIGHT)] {
        let (family, m, s) = kind.canonical();
        let t = KernelTransform::for_kernel(&Kernel::compile(family, m, s));
        let r = compare_table(kind, &t.map, table);
        total.checked += r.checked;
        total.matched += r.matched;
        total.mismatches.extend(r.mismatches);
    }
    total
}

/// Distribution over the knowledge states of a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDist {
    pub width: usize,
    pub probs: Vec<f64>,
}

impl StateDist {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability that the leftmost line stays undetermined once the other
    /// window lines are known.
    pub fn leftmost_unresolved(&self) -> f64 {
        states(self.width)
            .iter()
            .zip(&self.probs)
            .filter(|(&mask, _)| (0..8u8).all(|f| mask >> f & 1 == 0 || f & 1 == 0))
            .map(|(_, p)| p)
            .sum()
    }
}

/// Three raw channel outputs, each erased with probability `p`.
pub fn init_dist(p: f64) -> StateDist {
    let q = 1.0 - p;
    let mut probs = vec![0.0; 16];
    probs[0] = p * p * p;
    probs[1..=3].fill(q * p * p);
    probs[8..=10].fill(q * q * p);
    probs[15] = q * q * q;
    StateDist { width: 3, probs }
}

/// Reusable erasure analysis for one code: the transform tables depend only
/// on the circuit, not on the erasure rate.
pub struct ErasureAnalyzer {
    plan: Plan,
    transforms: Vec<Vec<Option<KernelTransform>>>,
}

impl ErasureAnalyzer {
    pub fn new(circuit: &GateList) -> Self {
        let plan = Plan::new(circuit.family, circuit.n);
        let mut transforms: Vec<Vec<Option<KernelTransform>>> =
            (0..=plan.n).map(|l| vec![None; 1 << l]).collect();
        // tables only for windows the decoder can reach
        let mut wanted: Vec<usize> = (1..=plan.size()).collect();
        for l in (1..=plan.n).rev() {
            let mut next = Vec::new();
            for &s in &wanted {
                let k = plan.kernel(l, s);
                if transforms[l as usize][s - 1].is_none() {
                    transforms[l as usize][s - 1] = Some(KernelTransform::for_kernel(k));
                    next.push(k.child.0);
                }
            }
            next.sort_unstable();
            next.dedup();
            wanted = next;
        }
        ErasureAnalyzer { plan, transforms }
    }

    /// Genie-aided probability, per position, that the position cannot be
    /// resolved when every later position is known.
    pub fn first_error_probs(&self, eps: f64) -> Vec<f64> {
        let n = self.plan.n;
        let size = self.plan.size();
        if n == 0 {
            return vec![eps];
        }
        let mut dists: Vec<Vec<Option<StateDist>>> = (0..=n).map(|l| vec![None; 1 << l]).collect();
        dists[0][0] = Some(StateDist {
            width: 1,
            probs: vec![eps, 1.0 - eps],
        });
        (1..=size)
            .map(|j| self.dist(n, j, &mut dists).leftmost_unresolved())
            .collect()
    }

    fn dist<'a>(&self, level: u32, s: usize, memo: &'a mut Vec<Vec<Option<StateDist>>>) -> &'a StateDist {
        if memo[level as usize][s - 1].is_none() {
            let t = self.transforms[level as usize][s - 1]
                .as_ref()
                .expect("transform for a reachable window");
            let cs = self.plan.kernel(level, s).child.0;
            let child = self.dist(level - 1, cs, memo).probs.clone();
            let probs = t.apply(&child, &child);
            memo[level as usize][s - 1] = Some(StateDist {
                width: t.out_width,
                probs,
            });
        }
        memo[level as usize][s - 1].as_ref().expect("just filled")
    }
}

/// Per-position first-error probabilities under erasure rate `eps`.
pub fn first_error_probs(circuit: &GateList, eps: f64) -> Vec<f64> {
    ErasureAnalyzer::new(circuit).first_error_probs(eps)
}

/// `(lower, upper)` frame-error bounds for a data set of 1-based positions.
pub fn fer_bounds(p: &[f64], data: &[usize]) -> Result<(f64, f64)> {
    let mut lower: f64 = 0.0;
    let mut upper = 0.0;
    for &j in data {
        let v = *p
            .get(j.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidArgument(format!("data position {j} outside 1..={}", p.len())))?;
        lower = lower.max(v);
        upper += v;
    }
    Ok((lower, upper.min(1.0)))
}

/// The `k` positions with the smallest scores, ties to the smaller index;
/// returned sorted.
pub fn best_positions(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if k > scores.len() {
        return Err(Error::InvalidArgument(format!(
            "{k} data bits requested from a code of length {}",
            scores.len()
        )));
    }
    let mut order: Vec<usize> = (1..=scores.len()).collect();
    order.sort_by(|&a, &b| scores[a - 1].total_cmp(&scores[b - 1]).then(a.cmp(&b)));
    let mut data = order[..k].to_vec();
    data.sort_unstable();
    Ok(data)
}

/// Frozen set (1-based, sorted) leaving the `k` most reliable positions free.
pub fn select_frozen_erasure(p: &[f64], k: usize) -> Result<Vec<usize>> {
    let data = best_positions(p, k)?;
    Ok(complement(p.len(), &data))
}

pub(crate) fn complement(size: usize, set: &[usize]) -> Vec<usize> {
    let mut member = vec![false; size + 1];
    for &j in set {
        member[j] = true;
    }
    (1..=size).filter(|&j| !member[j]).collect()
}

/// Least-squares fit of `Pe = 2^(-gamma * N^beta)` through `(n, Pe)` points,
/// i.e. a line through `(n, log2(-log2 Pe))`. Points with `Pe` outside
/// `(1e-300, 1)` are skipped. Returns `(gamma, beta)`.
pub fn fit_error_exponent(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, pe)| *pe > 1e-300 && *pe < 1.0)
        .map(|&(n, pe)| (n, (-pe.log2()).log2()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 points with 0 < Pe < 1, got {}",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all points share one n".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    Ok((intercept.exp2(), beta))
}

/// Upper-bound frame error of the best rate-`k/N` code for `eps`.
pub fn fer_bounds_for(circuit: &GateList, eps: f64, k: usize) -> Result<(f64, f64)> {
    let p = first_error_probs(circuit, eps);
    let data = best_positions(&p, k)?;
    fer_bounds(&p, &data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_circuit, encoding_matrix, CodeFamily};
    use proptest::prelude::*;

    const FAMILIES: [CodeFamily; 3] = [CodeFamily::POLAR, CodeFamily::CONV_OPEN, CodeFamily::CONV_PERIODIC];

    fn st(id: usize) -> KnowledgeState {
        KnowledgeState::from_id(id).unwrap()
    }

    #[test]
    fn sixteen_distinct_states() {
        let masks = states(3);
        let mut sorted = masks.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 16);
        assert_eq!(state_count(2), 5);
        assert_eq!(state_count(1), 2);
        for id in 1..=16 {
            let s = st(id);
            assert_eq!(s.canonical, s.canonical.rref().0);
            assert_eq!(canonicalize(&s.canonical).unwrap().id, id);
        }
    }

    #[test]
    fn canonicalize_examples() {
        let m = Gf2Matrix::from_rows(&[[1u8, 0, 0], [0, 1, 0]]).unwrap();
        assert_eq!(canonicalize(&m).unwrap().id, 9);
        assert_eq!(canonicalize(&Gf2Matrix::empty(3)).unwrap().id, 1);
        let m = Gf2Matrix::from_rows(&[[1u8, 1, 0], [0, 1, 1], [1, 0, 1]]).unwrap();
        assert_eq!(canonicalize(&m).unwrap().id, 15);
        assert!(canonicalize(&Gf2Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn every_3x3_matrix_lands_in_a_state() {
        for bits in 0..512u32 {
            let mut m = Gf2Matrix::zeros(3, 3);
            for i in 0..9 {
                m.set(i / 3, i % 3, bits >> i & 1 == 1);
            }
            let s = canonicalize(&m).unwrap();
            assert_eq!(s.rank(), m.rank());
        }
    }

    #[test]
    fn kernel_transform_examples() {
        assert_eq!(kernel_transform(KernelKind::TripleLeft, &st(2), &st(2)).unwrap().id, 2);
        assert_eq!(kernel_transform(KernelKind::TripleLeft, &st(16), &st(16)).unwrap().id, 16);
        assert_eq!(kernel_transform(KernelKind::TripleRight, &st(9), &st(9)).unwrap().id, 9);
        assert!(kernel_transform(KernelKind::PolarLeft, &st(1), &st(1)).is_err());
    }

    #[test]
    fn tables_regenerate_exactly() {
        let r = verify_tables();
        assert_eq!(r.checked, 512);
        assert!(r.is_ok(), "{:?}", &r.mismatches[..r.mismatches.len().min(5)]);
    }

    #[test]
    fn swapped_rows_do_not_reproduce_the_tables() {
        // same windows, but row B applied before row A
        let k = Kernel::compile(CodeFamily::CONV_OPEN, 16, 10);
        let m = 16;
        let s = 10;
        let swapped = |p: usize| -> Vec<usize> {
            // B first: odd lines keep t_p, even lines get t_p + t_{p-1}; then A on the result
            let b = |p: usize| if p % 2 == 0 { vec![p, p - 1] } else { vec![p] };
            let mut v = b(p);
            if p % 2 == 1 && p > 1 {
                v.extend(b(p - 1));
            }
            v
        };
        let (cs, cl) = k.child;
        let hidden: Vec<usize> = {
            let mut h: Vec<usize> = (0..cl)
                .flat_map(|i| [2 * (cs + i) - 1, 2 * (cs + i)])
                .flat_map(swapped)
                .filter(|&q| q < s)
                .collect();
            h.sort();
            h.dedup();
            h
        };
        let form = |p: usize| -> u16 {
            swapped(p).into_iter().fold(0u16, |acc, q| {
                let bit = if (s..s + 3).contains(&q) {
                    Some(q - s)
                } else {
                    hidden.iter().position(|&h| h == q).map(|i| 3 + i)
                };
                bit.map_or(acc, |b| acc ^ (1 << b))
            })
        };
        let a: Vec<u16> = (0..cl).map(|i| form(2 * (cs + i) - 1)).collect();
        let b: Vec<u16> = (0..cl).map(|i| form(2 * (cs + i))).collect();
        let map = transform_map(3, hidden.len(), &a, &b);
        assert!(m == 16);
        let r = compare_table(KernelKind::TripleLeft, &map, &TRIPLE_LEFT);
        assert!(!r.mismatches.is_empty());
    }

    #[test]
    fn init_dist_examples() {
        let d = init_dist(0.0);
        assert_eq!(d.probs[15], 1.0);
        assert!((d.total() - 1.0).abs() < 1e-15);
        let d = init_dist(1.0);
        assert_eq!(d.probs[0], 1.0);
        let d = init_dist(0.5);
        for i in [0, 1, 2, 3, 8, 9, 10, 15] {
            assert_eq!(d.probs[i], 0.125);
        }
        assert!((d.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polar_small_codes() {
        let p = first_error_probs(&build_circuit(CodeFamily::POLAR, 1), 0.5);
        assert_eq!(p, vec![0.25, 0.75]);
        let p = first_error_probs(&build_circuit(CodeFamily::POLAR, 2), 0.5);
        assert_eq!(p, vec![0.0625, 0.4375, 0.5625, 0.9375]);
        assert_eq!(select_frozen_erasure(&p, 2).unwrap(), vec![3, 4]);
        assert_eq!(best_positions(&p, 2).unwrap(), vec![1, 2]);
        for fam in FAMILIES {
            let p = first_error_probs(&build_circuit(fam, 5), 0.0);
            assert!(p.iter().all(|&v| v == 0.0));
        }
    }

    fn scalar_polar(n: u32, eps: f64) -> Vec<f64> {
        let mut level = vec![eps];
        for _ in 0..n {
            level = (1..=level.len() * 2)
                .map(|s| {
                    let e = level[s.div_ceil(2) - 1];
                    if s % 2 == 0 {
                        2.0 * e - e * e
                    } else {
                        e * e
                    }
                })
                .collect();
        }
        level
    }

    #[test]
    fn polar_matches_scalar_recursion() {
        for n in 0..=8 {
            for eps in [0.1, 0.37, 0.5, 0.9] {
                let p = first_error_probs(&build_circuit(CodeFamily::POLAR, n), eps);
                for (a, b) in p.iter().zip(scalar_polar(n, eps)) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    /// Exhaustive over erasure patterns: position j is unresolved when e_j is
    /// outside the span of the observed columns restricted to rows 1..=j.
    fn brute_force(circuit: &GateList, eps: f64) -> Vec<f64> {
        let size = circuit.len();
        let g = encoding_matrix(circuit);
        let mut out = vec![0.0; size];
        for pattern in 0..(1u32 << size) {
            let erased = pattern.count_ones() as i32;
            let w = eps.powi(erased) * (1.0 - eps).powi(size as i32 - erased);
            for j in 1..=size {
                let cols: Vec<Vec<u8>> = (0..size)
                    .filter(|&i| pattern >> i & 1 == 0)
                    .map(|i| (0..j).map(|r| g.get(r, i) as u8).collect())
                    .collect();
                let rank = |rows: &[Vec<u8>]| if rows.is_empty() { 0 } else { Gf2Matrix::from_rows(rows).unwrap().rank() };
                let r0 = rank(&cols);
                let mut with = cols.clone();
                let mut ej = vec![0u8; j];
                ej[j - 1] = 1;
                with.push(ej);
                if rank(&with) > r0 {
                    out[j - 1] += w;
                }
            }
        }
        out
    }

    #[test]
    fn matches_erasure_pattern_enumeration() {
        for fam in FAMILIES {
            for n in 1..=3 {
                let c = build_circuit(fam, n);
                for eps in [0.25, 0.5] {
                    let got = first_error_probs(&c, eps);
                    let want = brute_force(&c, eps);
                    for j in 0..got.len() {
                        assert!((got[j] - want[j]).abs() < 1e-12, "{fam} n={n} eps={eps} j={}", j + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn monotone_in_eps() {
        for fam in FAMILIES {
            for n in 1..=6 {
                let an = ErasureAnalyzer::new(&build_circuit(fam, n));
                let mut prev = vec![0.0; 1 << n];
                for step in 1..=9 {
                    let p = an.first_error_probs(step as f64 / 10.0);
                    for j in 0..p.len() {
                        assert!(p[j] + 1e-12 >= prev[j], "{fam} n={n} j={} {} < {}", j + 1, p[j], prev[j]);
                    }
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn fer_bounds_examples() {
        let p = [0.1, 0.2, 0.3];
        assert_eq!(fer_bounds(&p, &[2]).unwrap(), (0.2, 0.2));
        assert_eq!(fer_bounds(&[0.0; 4], &[1, 2]).unwrap(), (0.0, 0.0));
        assert_eq!(fer_bounds(&[0.9, 0.8], &[1, 2]).unwrap(), (0.9, 1.0));
        assert!(fer_bounds(&p, &[4]).is_err());
    }

    #[test]
    fn frozen_selection_edges() {
        let p = [0.5, 0.1, 0.1, 0.9];
        assert!(select_frozen_erasure(&p, 4).unwrap().is_empty());
        assert_eq!(select_frozen_erasure(&p, 0).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(select_frozen_erasure(&p, 1).unwrap(), vec![1, 3, 4]);
        assert!(select_frozen_erasure(&p, 5).is_err());
    }

    #[test]
    fn exponent_fit_recovers_synthetic_line() {
        let pts: Vec<(f64, f64)> = (4..=10)
            .map(|n| {
                let n = n as f64;
                (n, (-2.0 * (0.5 * n).exp2()).exp2())
            })
            .collect();
        let (g, b) = fit_error_exponent(&pts).unwrap();
        assert!((g - 2.0).abs() < 1e-9 && (b - 0.5).abs() < 1e-9);
        assert!(fit_error_exponent(&pts[..2]).is_err());
        assert!(fit_error_exponent(&[(4.0, 0.1), (4.0, 0.01), (4.0, 0.001)]).is_err());
    }

    proptest! {
        #[test]
        fn state_distributions_stay_normalized(eps in 0.0f64..=1.0, kind in 0usize..9) {
            let kind = KernelKind::ALL[kind];
            let (fam, m, s) = kind.canonical();
            let t = KernelTransform::for_kernel(&Kernel::compile(fam, m, s));
            let leaf = StateDist { width: 1, probs: vec![eps, 1.0 - eps] };
            let input = match t.in_width {
                1 => leaf.probs.clone(),
                3 => init_dist(eps).probs,
                _ => {
                    let pair = KernelTransform::for_kernel(&Kernel::compile(fam, 2, 1));
                    pair.apply(&leaf.probs, &leaf.probs)
                }
            };
            let out = t.apply(&input, &input);
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(out.iter().all(|&p| p >= 0.0));
        }
    }
}
