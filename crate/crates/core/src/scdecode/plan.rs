//! Window geometry and compiled contraction kernels.
//!
//! A block of size `M` at level `l = log2 M` has top lines `t_1..t_M` (toward
//! the logical input) and bottom lines `b_1..b_M` feeding its two children:
//! the odd child sees `b_1, b_3, ..` as its tops and the even child sees
//! `b_2, b_4, ..`. Decoding a block over a window `[s, s+len)` means computing
//! the joint posterior of those tops when every top right of the window is
//! known and every top left of it is uniform. The children are asked for a
//! window of their own; a kernel maps the two child tensors to the parent one.

use serde::{Deserialize, Serialize};

use crate::circuit::CodeFamily;
use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::scdecode::tensor::ProbTensor;

/// The contraction shapes that occur while decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    /// Polar, partner line unknown: 1+1 -> 1.
    PolarLeft,
    /// Polar, partner line known: 1+1 -> 1.
    PolarRight,
    /// Lowest convolutional layer: 1+1 -> 2.
    PairCombine,
    /// Second layer, even window start: 2+2 -> 3.
    PairToTripleLeft,
    /// Second layer, odd window start: 2+2 -> 3.
    PairToTripleRight,
    /// Bulk layer, even window start: 3+3 -> 3.
    TripleLeft,
    /// Bulk layer, odd window start: 3+3 -> 3.
    TripleRight,
    /// Right edge: 2+2 -> 2.
    BoundaryPair,
    /// Right edge, last line: 2+2 -> 1 or 1+1 -> 1.
    BoundarySingle,
}

impl KernelKind {
    pub const ALL: [KernelKind; 9] = [
        KernelKind::PolarLeft,
        KernelKind::PolarRight,
        KernelKind::PairCombine,
        KernelKind::PairToTripleLeft,
        KernelKind::PairToTripleRight,
        KernelKind::TripleLeft,
        KernelKind::TripleRight,
        KernelKind::BoundaryPair,
        KernelKind::BoundarySingle,
    ];

    /// A representative `(family, block size, window start)` with this shape.
    pub fn canonical(self) -> (CodeFamily, usize, usize) {
        match self {
            KernelKind::PolarLeft => (CodeFamily::POLAR, 2, 2),
            KernelKind::PolarRight => (CodeFamily::POLAR, 2, 1),
            KernelKind::PairCombine => (CodeFamily::CONV_OPEN, 2, 1),
            KernelKind::PairToTripleLeft => (CodeFamily::CONV_OPEN, 4, 2),
            KernelKind::PairToTripleRight => (CodeFamily::CONV_OPEN, 4, 1),
            KernelKind::TripleLeft => (CodeFamily::CONV_OPEN, 16, 10),
            KernelKind::TripleRight => (CodeFamily::CONV_OPEN, 16, 11),
            KernelKind::BoundaryPair => (CodeFamily::CONV_OPEN, 4, 3),
            KernelKind::BoundarySingle => (CodeFamily::CONV_OPEN, 4, 4),
        }
    }
}

/// XOR of up to three top lines (1-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Expr {
    tops: [u32; 3],
    len: u8,
}

impl Expr {
    fn toggle(&mut self, q: usize) {
        let q = q as u32;
        if let Some(i) = self.tops[..self.len as usize].iter().position(|&t| t == q) {
            self.tops[i] = self.tops[self.len as usize - 1];
            self.len -= 1;
        } else {
            self.tops[self.len as usize] = q;
            self.len += 1;
        }
    }

    pub fn tops(&self) -> impl Iterator<Item = usize> + '_ {
        self.tops[..self.len as usize].iter().map(|&q| q as usize)
    }
}

/// Bottom line `p` of a size-`m` block as a sum of its top lines.
pub fn bottom_expr(family: CodeFamily, m: usize, p: usize) -> Expr {
    debug_assert!((1..=m).contains(&p) && m >= 2);
    let mut e = Expr::default();
    // value of line p after row A, before row B
    let after_a = |e: &mut Expr, p: usize| {
        e.toggle(p);
        if family.is_conv() && p % 2 == 1 {
            if p > 1 {
                e.toggle(p - 1);
            } else if family.is_periodic() {
                e.toggle(m);
            }
        }
    };
    after_a(&mut e, p);
    if p.is_multiple_of(2) {
        after_a(&mut e, p - 1);
    }
    e
}

/// Window length for a window starting at `s` in a size-`m` block.
pub fn window_len(family: CodeFamily, m: usize, s: usize) -> usize {
    if family.is_conv() {
        3.min(m - s + 1)
    } else {
        1
    }
}

/// Child window `(start, len)` requested by a parent window starting at `s`.
pub fn child_window(family: CodeFamily, m: usize, s: usize) -> (usize, usize) {
    let mc = m / 2;
    if family.is_conv() {
        if mc <= 2 {
            (1, mc)
        } else {
            let start = (s / 2).max(1);
            (start, 3.min(mc - start + 1))
        }
    } else {
        (s.div_ceil(2), 1)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Term {
    pub out: u8,
    pub a: u8,
    pub b: u8,
    pub w: f64,
}

/// Known top line `q` flips these child-window index bits when it is 1.
#[derive(Clone, Copy, Debug)]
pub(crate) struct KnownFlip {
    pub q: u32,
    pub a: u8,
    pub b: u8,
}

/// A contraction kernel for one `(block size, window start)`.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub kind: KernelKind,
    /// Block size `M`.
    pub m: usize,
    pub start: usize,
    pub len: usize,
    /// Window of both children, `(start, len)`.
    pub child: (usize, usize),
    /// Number of unknown tops left of the window that reach the child windows.
    pub hidden: usize,
    pub(crate) terms: Vec<Term>,
    pub(crate) known: Vec<KnownFlip>,
    /// Child-window bits as masks over (window bits, then hidden tops).
    pub(crate) a_forms: [u16; 3],
    pub(crate) b_forms: [u16; 3],
}

impl Kernel {
    pub fn compile(family: CodeFamily, m: usize, s: usize) -> Kernel {
        assert!(m >= 2 && (1..=m).contains(&s), "window start {s} outside block of size {m}");
        let len = window_len(family, m, s);
        let (cs, cl) = child_window(family, m, s);

        let exprs_a: Vec<Expr> = (0..cl).map(|k| bottom_expr(family, m, 2 * (cs + k) - 1)).collect();
        let exprs_b: Vec<Expr> = (0..cl).map(|k| bottom_expr(family, m, 2 * (cs + k))).collect();

        let mut hidden: Vec<usize> = exprs_a
            .iter()
            .chain(&exprs_b)
            .flat_map(|e| e.tops().collect::<Vec<_>>())
            .filter(|&q| q < s)
            .collect();
        hidden.sort_unstable();
        hidden.dedup();

        let var_of = |q: usize| -> Option<usize> {
            if (s..s + len).contains(&q) {
                Some(q - s)
            } else {
                hidden.iter().position(|&h| h == q).map(|i| len + i)
            }
        };
        let forms = |exprs: &[Expr]| {
            let mut f = [0u16; 3];
            for (k, e) in exprs.iter().enumerate() {
                for q in e.tops() {
                    if let Some(v) = var_of(q) {
                        f[k] ^= 1 << v;
                    }
                }
            }
            f
        };
        let a_forms = forms(&exprs_a);
        let b_forms = forms(&exprs_b);

        let mut counts = vec![0u32; 512];
        let nvars = len + hidden.len();
        for v in 0u16..(1 << nvars) {
            let out = (v & ((1 << len) - 1)) as usize;
            let ai = eval_forms(&a_forms[..cl], v);
            let bi = eval_forms(&b_forms[..cl], v);
            counts[(out << 6) | (ai << 3) | bi] += 1;
        }
        let terms = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| Term {
                out: (i >> 6) as u8,
                a: ((i >> 3) & 7) as u8,
                b: (i & 7) as u8,
                w: c as f64,
            })
            .collect();

        let mut known: Vec<KnownFlip> = Vec::new();
        for (side, exprs) in [(0, &exprs_a), (1, &exprs_b)] {
            for (k, e) in exprs.iter().enumerate() {
                for q in e.tops().filter(|&q| q >= s + len) {
                    let idx = match known.iter().position(|f| f.q as usize == q) {
                        Some(i) => i,
                        None => {
                            known.push(KnownFlip { q: q as u32, a: 0, b: 0 });
                            known.len() - 1
                        }
                    };
                    if side == 0 {
                        known[idx].a ^= 1 << k;
                    } else {
                        known[idx].b ^= 1 << k;
                    }
                }
            }
        }
        known.retain(|f| f.a != 0 || f.b != 0);
        known.sort_by_key(|f| f.q);

        Kernel {
            kind: classify(family, s, cl, len),
            m,
            start: s,
            len,
            child: (cs, cl),
            hidden: hidden.len(),
            terms,
            known,
            a_forms,
            b_forms,
        }
    }

    /// Contracts two child tensors; `af`/`bf` are the index flips contributed
    /// by known tops equal to 1. The result is unnormalized.
    #[inline]
    pub(crate) fn apply(&self, a: &ProbTensor, b: &ProbTensor, af: u8, bf: u8) -> ProbTensor {
        let (av, bv) = (a.raw(), b.raw());
        let mut out = [0.0f64; 8];
        for t in &self.terms {
            out[t.out as usize] += t.w * av[(t.a ^ af) as usize] * bv[(t.b ^ bf) as usize];
        }
        ProbTensor::from_raw(self.len as u8, out)
    }

    /// Known top lines this kernel reads, in increasing order.
    pub fn known_tops(&self) -> impl Iterator<Item = usize> + '_ {
        self.known.iter().map(|f| f.q as usize)
    }

    /// Index flips for the given values of the known tops (see [`Self::known_tops`]).
    pub(crate) fn flips(&self, mut value: impl FnMut(usize) -> bool) -> (u8, u8) {
        let (mut af, mut bf) = (0u8, 0u8);
        for f in &self.known {
            if value(f.q as usize) {
                af ^= f.a;
                bf ^= f.b;
            }
        }
        (af, bf)
    }
}

#[inline]
fn eval_forms(forms: &[u16], v: u16) -> usize {
    forms
        .iter()
        .enumerate()
        .map(|(k, f)| (((f & v).count_ones() & 1) as usize) << k)
        .sum()
}

fn classify(family: CodeFamily, s: usize, child_len: usize, len: usize) -> KernelKind {
    if !family.is_conv() {
        return if s.is_multiple_of(2) {
            KernelKind::PolarLeft
        } else {
            KernelKind::PolarRight
        };
    }
    match (child_len, len) {
        (1, 2) => KernelKind::PairCombine,
        (2, 3) if s.is_multiple_of(2) => KernelKind::PairToTripleLeft,
        (2, 3) => KernelKind::PairToTripleRight,
        (3, 3) if s.is_multiple_of(2) => KernelKind::TripleLeft,
        (3, 3) => KernelKind::TripleRight,
        (2, 2) => KernelKind::BoundaryPair,
        _ => KernelKind::BoundarySingle,
    }
}

/// Checks that the kernel for `(m, s)` is an exact contraction: child bottoms
/// right of the child window must be fixed by known tops, and child bottoms
/// left of it must stay uniform and independent of everything the kernel
/// reads.
pub fn check_window(family: CodeFamily, m: usize, s: usize) -> std::result::Result<(), String> {
    let len = window_len(family, m, s);
    let (cs, cl) = child_window(family, m, s);
    let mc = m / 2;
    let cols = s.max(2) - 1;
    // unknown part of a bottom line as a row over tops 1..s
    let unknown_part = |e: &Expr| -> Vec<u8> {
        let mut row = vec![0u8; cols];
        for q in e.tops().filter(|&q| q < s) {
            row[q - 1] ^= 1;
        }
        row
    };
    let mut window_parts = Vec::new();
    let mut left_parts = Vec::new();
    for q in 1..=mc {
        for p in [2 * q - 1, 2 * q] {
            let e = bottom_expr(family, m, p);
            if q < cs {
                left_parts.push(unknown_part(&e));
            } else if q < cs + cl {
                window_parts.push(unknown_part(&e));
            } else if e.tops().any(|t| t < s + len) {
                return Err(format!("bottom {p} right of the child window reads an unknown top"));
            }
        }
    }
    let rank = |rows: &[Vec<u8>]| {
        if rows.is_empty() {
            0
        } else {
            Gf2Matrix::from_rows(rows).expect("rows share a length").rank()
        }
    };
    let base = rank(&window_parts);
    let mut all = window_parts;
    let n_left = left_parts.len();
    all.extend(left_parts);
    if rank(&all) != base + n_left {
        return Err("child bottoms left of the window are not independent uniform lines".into());
    }
    Ok(())
}

/// All kernels and bottom expressions for one code.
#[derive(Clone, Debug)]
pub struct Plan {
    pub family: CodeFamily,
    pub n: u32,
    /// `kernels[l][s-1]` for levels `1..=n`; level 0 is empty.
    kernels: Vec<Vec<Kernel>>,
    /// `exprs[l][p-1]` for levels `1..=n`.
    exprs: Vec<Vec<Expr>>,
}

impl Plan {
    pub fn new(family: CodeFamily, n: u32) -> Plan {
        let family = family.normalized();
        let mut kernels = vec![Vec::new()];
        let mut exprs = vec![Vec::new()];
        for l in 1..=n {
            let m = 1usize << l;
            kernels.push((1..=m).map(|s| Kernel::compile(family, m, s)).collect());
            exprs.push((1..=m).map(|p| bottom_expr(family, m, p)).collect());
        }
        Plan {
            family,
            n,
            kernels,
            exprs,
        }
    }

    pub fn size(&self) -> usize {
        1 << self.n
    }

    #[inline]
    pub fn kernel(&self, level: u32, s: usize) -> &Kernel {
        &self.kernels[level as usize][s - 1]
    }

    #[inline]
    pub fn expr(&self, level: u32, p: usize) -> &Expr {
        &self.exprs[level as usize][p - 1]
    }

    /// Window length of a top-level window starting at `i`.
    pub fn top_window_len(&self, i: usize) -> usize {
        if self.n == 0 {
            1
        } else {
            window_len(self.family, self.size(), i)
        }
    }
}

/// Contracts `a` and `b` with the representative wiring of `kind`, all known
/// tops set to 0. The output is normalized.
pub fn contract_kernel(kind: KernelKind, a: &ProbTensor, b: &ProbTensor) -> Result<ProbTensor> {
    contract_kernel_with(kind, a, b, |_| false)
}

/// Like [`contract_kernel`], with known top values supplied by `known(q)`.
pub fn contract_kernel_with(
    kind: KernelKind,
    a: &ProbTensor,
    b: &ProbTensor,
    known: impl FnMut(usize) -> bool,
) -> Result<ProbTensor> {
    let (family, m, s) = kind.canonical();
    let k = Kernel::compile(family, m, s);
    if a.arity() != k.child.1 || b.arity() != k.child.1 {
        return Err(Error::Dimension(format!(
            "{kind:?} takes two arity-{} tensors, got {} and {}",
            k.child.1,
            a.arity(),
            b.arity()
        )));
    }
    let (af, bf) = k.flips(known);
    let mut out = k.apply(a, b, af, bf);
    if !out.normalize() {
        return Err(Error::Contradiction { position: s });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONV: [CodeFamily; 2] = [CodeFamily::CONV_OPEN, CodeFamily::CONV_PERIODIC];

    #[test]
    fn bottom_expressions() {
        let f = CodeFamily::CONV_OPEN;
        let tops = |m, p| {
            let mut v: Vec<usize> = bottom_expr(f, m, p).tops().collect();
            v.sort();
            v
        };
        assert_eq!(tops(8, 1), vec![1]);
        assert_eq!(tops(8, 2), vec![1, 2]);
        assert_eq!(tops(8, 3), vec![2, 3]);
        assert_eq!(tops(8, 4), vec![2, 3, 4]);
        let p = CodeFamily::CONV_PERIODIC;
        let mut v: Vec<usize> = bottom_expr(p, 8, 2).tops().collect();
        v.sort();
        assert_eq!(v, vec![1, 2, 8]);
        // at M = 2 the wrap gate cancels line 2 out of b_2
        assert_eq!(bottom_expr(p, 2, 2).tops().collect::<Vec<_>>(), vec![1]);
        let mut v: Vec<usize> = bottom_expr(CodeFamily::POLAR, 8, 6).tops().collect();
        v.sort();
        assert_eq!(v, vec![5, 6]);
    }

    #[test]
    fn kernel_kinds_match_shapes() {
        for kind in KernelKind::ALL {
            let (fam, m, s) = kind.canonical();
            assert_eq!(Kernel::compile(fam, m, s).kind, kind);
        }
    }

    #[test]
    fn polar_minus_and_plus() {
        let a = ProbTensor::bit(0.9, 0.1);
        let minus = contract_kernel(KernelKind::PolarLeft, &a, &a).unwrap();
        assert!((minus.get(0) - 0.82).abs() < 1e-12);
        assert!((minus.get(1) - 0.18).abs() < 1e-12);
        let plus = contract_kernel(KernelKind::PolarRight, &a, &a).unwrap();
        let z = 0.81 + 0.01;
        assert!((plus.get(0) - 0.81 / z).abs() < 1e-12);
        let plus1 = contract_kernel_with(KernelKind::PolarRight, &a, &a, |_| true).unwrap();
        assert!((plus1.get(0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pair_combine_of_zeros_is_zero() {
        let z = ProbTensor::point(1, 0);
        let out = contract_kernel(KernelKind::PairCombine, &z, &z).unwrap();
        assert_eq!(out.values(), ProbTensor::point(2, 0).values());
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let a = ProbTensor::uniform(2);
        assert!(contract_kernel(KernelKind::TripleLeft, &a, &a).is_err());
    }

    #[test]
    fn uniform_in_uniform_out() {
        for kind in KernelKind::ALL {
            let (fam, m, s) = kind.canonical();
            let k = Kernel::compile(fam, m, s);
            let u = ProbTensor::uniform(k.child.1);
            let out = contract_kernel(kind, &u, &u).unwrap();
            for v in out.values() {
                assert!((v - 1.0 / (1 << k.len) as f64).abs() < 1e-12, "{kind:?}");
            }
        }
    }

    #[test]
    fn windows_are_exact_contractions() {
        for fam in [CodeFamily::POLAR, CONV[0], CONV[1]] {
            for l in 1..=8u32 {
                let m = 1usize << l;
                for s in 1..=m {
                    check_window(fam, m, s).unwrap_or_else(|e| panic!("{fam} m={m} s={s}: {e}"));
                }
            }
        }
    }

    #[test]
    fn hidden_tops_stay_few() {
        for fam in CONV {
            let plan = Plan::new(fam, 8);
            for l in 1..=8 {
                for s in 1..=(1usize << l) {
                    assert!(plan.kernel(l, s).hidden <= 3);
                }
            }
        }
    }
}
