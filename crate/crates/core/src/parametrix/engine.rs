//! Product integration for Volterra-split kernels.
//!
//! Every block of `Q` has the form
//! `u(r) = c_< A(r) ∫_0^r B(ρ) h(ρ) ρ dρ + c_> C(r) ∫_r^1 D(ρ) h(ρ) ρ dρ`.
//! The interval is cut at every evaluation point and refined into Gauss
//! panels; the density `h` is interpolated onto the panel points. Prefix
//! sums are propagated in the ratio form `B(x)/B(r_i)` so that no factor is
//! ever collapsed to `f64` outside the product `A(r_i) B(r_i)`, which is
//! bounded.

use crate::bessel::AdjacentScaled;
use crate::ext::ExtFloat;
use crate::quadrature::gauss_legendre;
use std::ops::{Add, Mul};

use super::Result;

#[derive(Debug, Clone, Copy)]
pub struct LayoutOptions {
    pub gauss_points: usize,
    /// Panel ratio `b/a` never exceeds `ratio`.
    pub ratio: f64,
    /// Panel width never exceeds `max_width`.
    pub max_width: f64,
    /// Geometric levels on the first interval toward `0`.
    pub zero_levels: usize,
}

pub const DEFAULT_GAUSS_POINTS: usize = 10;

impl LayoutOptions {
    /// Panel sizes matched to the orders and argument scale of mode `(m, n)`.
    pub fn for_mode(m: i32, n: i32, gauss_points: usize) -> Self {
        let lo = n.unsigned_abs().min((n + 1).unsigned_abs()) as f64;
        let hi = lo + 1.0;
        let ratio = (1.0 + 4.0 / (hi + 1.0)).min(2.0);
        let max_width = if m == 0 {
            f64::INFINITY
        } else {
            2.0 / m.unsigned_abs() as f64
        };
        let zero_levels = ((35.0 / ((lo + 2.0) * ratio.ln())).ceil() as usize).clamp(2, 40);
        LayoutOptions {
            gauss_points,
            ratio,
            max_width,
            zero_levels,
        }
    }
}

/// Evaluation points plus Gauss panels between them.
#[derive(Debug, Clone)]
pub struct Layout {
    pub eval: Vec<f64>,
    pub pts: Vec<f64>,
    /// `ω_l x_l`
    pub wr: Vec<f64>,
    /// points of segment `i` (between `eval[i-1]` and `eval[i]`) are `seg[i]..seg[i+1]`
    pub seg: Vec<usize>,
}

fn split_geometric(a: f64, b: f64, ratio: f64, max_width: f64, out: &mut Vec<(f64, f64)>) {
    let by_ratio = ((b / a).ln() / ratio.ln()).ceil().max(1.0);
    let by_width = ((b - a) / max_width).ceil().max(1.0);
    let k = by_ratio.max(by_width) as usize;
    let q = (b / a).powf(1.0 / k as f64);
    let mut x = a;
    for j in 0..k {
        let y = if j + 1 == k { b } else { x * q };
        out.push((x, y));
        x = y;
    }
}

impl Layout {
    pub fn new(eval: &[f64], opts: &LayoutOptions) -> Self {
        assert!(!eval.is_empty() && eval[0] > 0.0);
        let (gx, gw) = gauss_legendre(opts.gauss_points);
        let mut pts = Vec::new();
        let mut wr = Vec::new();
        let mut seg = vec![0];
        let push_panel = |a: f64, b: f64, pts: &mut Vec<f64>, wr: &mut Vec<f64>| {
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in gx.iter().zip(&gw) {
                let p = c + h * x;
                pts.push(p);
                wr.push(h * w * p);
            }
        };
        // first interval, graded toward 0
        let mut panels = Vec::new();
        let r0 = eval[0];
        let bottom = r0 / opts.ratio.powi(opts.zero_levels as i32);
        panels.push((0.0, bottom));
        split_geometric(bottom, r0, opts.ratio, opts.max_width, &mut panels);
        for (a, b) in panels.drain(..) {
            push_panel(a, b, &mut pts, &mut wr);
        }
        seg.push(pts.len());
        for w in eval.windows(2) {
            split_geometric(w[0], w[1], opts.ratio, opts.max_width, &mut panels);
            for (a, b) in panels.drain(..) {
                push_panel(a, b, &mut pts, &mut wr);
            }
            seg.push(pts.len());
        }
        Layout {
            eval: eval.to_vec(),
            pts,
            wr,
            seg,
        }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }
}

/// One radial factor of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    /// `I` at adjacent-pair slot `k`, argument `|m| x`.
    I(usize),
    /// `K` at adjacent-pair slot `k`.
    K(usize),
    /// `x^p`.
    Pow(i32),
}

/// Factor values at a set of points, with `x`-derivatives.
pub struct FactorTable {
    scale: f64,
    lo: u32,
    bessel: Vec<AdjacentScaled>,
    xs: Vec<f64>,
}

impl FactorTable {
    /// `scale = |m|`; Bessel data is only built when `scale > 0`.
    pub fn new(xs: &[f64], scale: f64, lo: u32) -> Result<Self> {
        let bessel = if scale > 0.0 {
            xs.iter()
                .map(|&x| AdjacentScaled::new(lo, scale * x))
                .collect::<std::result::Result<_, _>>()?
        } else {
            Vec::new()
        };
        Ok(FactorTable {
            scale,
            lo,
            bessel,
            xs: xs.to_vec(),
        })
    }

    pub fn value(&self, f: Factor, j: usize) -> ExtFloat {
        match f {
            Factor::Pow(p) => pow_ext(self.xs[j], p),
            Factor::I(k) => {
                let b = &self.bessel[j];
                b.i[k] * ExtFloat::exp(b.t)
            }
            Factor::K(k) => {
                let b = &self.bessel[j];
                b.k[k] * ExtFloat::exp(-b.t)
            }
        }
    }

    pub fn deriv(&self, f: Factor, j: usize) -> ExtFloat {
        match f {
            Factor::Pow(0) => ExtFloat::ZERO,
            Factor::Pow(p) => pow_ext(self.xs[j], p - 1).scale(p as f64),
            Factor::I(k) => {
                let b = &self.bessel[j];
                let (t, up) = (b.t, ExtFloat::exp(b.t));
                let lo = self.lo as f64;
                let d = if k == 0 {
                    b.i[1] + b.i[0].scale(lo / t)
                } else {
                    b.i[0] - b.i[1].scale((lo + 1.0) / t)
                };
                (d * up).scale(self.scale)
            }
            Factor::K(k) => {
                let b = &self.bessel[j];
                let (t, down) = (b.t, ExtFloat::exp(-b.t));
                let lo = self.lo as f64;
                let d = if k == 0 {
                    b.k[0].scale(lo / t) - b.k[1]
                } else {
                    -b.k[0] - b.k[1].scale((lo + 1.0) / t)
                };
                (d * down).scale(self.scale)
            }
        }
    }
}

fn pow_ext(x: f64, p: i32) -> ExtFloat {
    let b = ExtFloat::new(x);
    if p >= 0 {
        b.powi(p as u32)
    } else {
        b.recip().powi(p.unsigned_abs())
    }
}

/// `coef · outer(r) ∫ inner(ρ) h(ρ) ρ dρ` over one side of `r`.
#[derive(Debug, Clone, Copy)]
pub struct Half {
    pub coef: f64,
    pub outer: Factor,
    pub inner: Factor,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BlockSpec {
    pub pre: Option<Half>,
    pub suf: Option<Half>,
}

#[derive(Debug, Clone)]
struct CompiledHalf {
    /// `coef A(r_i) B(r_i)`
    ab: Vec<f64>,
    /// `coef A'(r_i) B(r_i)`
    dab: Vec<f64>,
    /// `B(r_{i-1})/B(r_i)` (prefix) or `D(r_{i+1})/D(r_i)` (suffix)
    step: Vec<f64>,
    /// per panel point: ratio times `ω x`
    w: Vec<f64>,
}

/// A block compiled against a layout.
#[derive(Debug, Clone)]
pub struct Block {
    pre: Option<CompiledHalf>,
    suf: Option<CompiledHalf>,
    /// `(c_< A B - c_> C D)(r_i) r_i`, the derivative jump at `ρ = r`
    jump: Vec<f64>,
}

fn compile_half(
    layout: &Layout,
    at_eval: &FactorTable,
    at_pts: &FactorTable,
    h: &Half,
    prefix: bool,
) -> CompiledHalf {
    let ne = layout.eval.len();
    let mut ab = vec![0.0; ne];
    let mut dab = vec![0.0; ne];
    let mut step = vec![0.0; ne];
    let mut w = vec![0.0; layout.len()];
    let inner_eval: Vec<ExtFloat> = (0..ne).map(|i| at_eval.value(h.inner, i)).collect();
    for i in 0..ne {
        ab[i] = h.coef * (at_eval.value(h.outer, i) * inner_eval[i]).to_f64();
        dab[i] = h.coef * (at_eval.deriv(h.outer, i) * inner_eval[i]).to_f64();
        // prefix segment i is normalised by B(r_i); suffix segment i+1 by D(r_i)
        let (seg, norm) = if prefix {
            if i > 0 {
                step[i] = (inner_eval[i - 1] / inner_eval[i]).to_f64();
            }
            (i, inner_eval[i])
        } else {
            if i + 1 < ne {
                step[i] = (inner_eval[i + 1] / inner_eval[i]).to_f64();
            }
            (i + 1, inner_eval[i])
        };
        if seg < ne {
            for l in layout.seg[seg]..layout.seg[seg + 1] {
                w[l] = (at_pts.value(h.inner, l) / norm).to_f64() * layout.wr[l];
            }
        }
    }
    CompiledHalf { ab, dab, step, w }
}

impl Block {
    pub fn compile(layout: &Layout, at_eval: &FactorTable, at_pts: &FactorTable, spec: &BlockSpec) -> Self {
        let pre = spec.pre.as_ref().map(|h| compile_half(layout, at_eval, at_pts, h, true));
        let suf = spec.suf.as_ref().map(|h| compile_half(layout, at_eval, at_pts, h, false));
        let ne = layout.eval.len();
        let jump = (0..ne)
            .map(|i| {
                let a = pre.as_ref().map_or(0.0, |p| p.ab[i]);
                let b = suf.as_ref().map_or(0.0, |s| s.ab[i]);
                (a - b) * layout.eval[i]
            })
            .collect();
        Block { pre, suf, jump }
    }

    /// Values and derivatives at the evaluation points for a density given
    /// at the panel points (`h_pts`) and at the evaluation points (`h_eval`).
    pub fn apply<T>(&self, layout: &Layout, h_pts: &[T], h_eval: &[T], out: &mut [T], dout: &mut [T])
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        let ne = layout.eval.len();
        if let Some(p) = &self.pre {
            let mut acc = T::default();
            for i in 0..ne {
                acc = acc * p.step[i];
                for l in layout.seg[i]..layout.seg[i + 1] {
                    acc = acc + h_pts[l] * p.w[l];
                }
                out[i] = out[i] + acc * p.ab[i];
                dout[i] = dout[i] + acc * p.dab[i];
            }
        }
        if let Some(s) = &self.suf {
            let mut acc = T::default();
            for i in (0..ne).rev() {
                if i + 1 < ne {
                    acc = acc * s.step[i];
                    for l in layout.seg[i + 1]..layout.seg[i + 2] {
                        acc = acc + h_pts[l] * s.w[l];
                    }
                }
                out[i] = out[i] + acc * s.ab[i];
                dout[i] = dout[i] + acc * s.dab[i];
            }
        }
        for i in 0..ne {
            dout[i] = dout[i] + h_eval[i] * self.jump[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_kernel_on_constant_density() {
        // -∫_0^r (ρ^0 / r) ρ dρ = -r/2
        let eval: Vec<f64> = (1..=12).map(|k| k as f64 / 12.0).collect();
        let opts = LayoutOptions::for_mode(0, 0, 8);
        let layout = Layout::new(&eval, &opts);
        let te = FactorTable::new(&layout.eval, 0.0, 0).unwrap();
        let tp = FactorTable::new(&layout.pts, 0.0, 0).unwrap();
        let spec = BlockSpec {
            pre: Some(Half {
                coef: -1.0,
                outer: Factor::Pow(-1),
                inner: Factor::Pow(0),
            }),
            suf: None,
        };
        let block = Block::compile(&layout, &te, &tp, &spec);
        let ones_p = vec![1.0; layout.len()];
        let ones_e = vec![1.0; eval.len()];
        let mut out = vec![0.0; eval.len()];
        let mut dout = vec![0.0; eval.len()];
        block.apply(&layout, &ones_p, &ones_e, &mut out, &mut dout);
        for (i, r) in eval.iter().enumerate() {
            assert!((out[i] + r / 2.0).abs() < 1e-14);
            assert!((dout[i] + 0.5).abs() < 1e-13);
        }
    }
}
