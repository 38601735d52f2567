//! Batched second-order forward propagation through the network with a
//! hand-derived reverse pass.
//!
//! For a chunk of points the network is pushed forward once, carrying the
//! value stream together with first and second directional derivative
//! streams along `x` and `t`. All streams of a layer are stacked column-wise
//! so each layer costs one matrix product. The reverse pass consumes per-point
//! adjoint seeds `∂L/∂(u, u_x, u_xx, u_t, u_tt)` and accumulates parameter
//! gradients with the same stacked layout.
//!
//! The scalar path (`NetworkParams::forward_with` over `Dual2<Var>`) computes
//! identical quantities one point at a time and serves as the test oracle.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2, Axis, Zip};

use super::{Jet, NetworkError, NetworkParams};

/// Derivative order required along each input direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JetSpec {
    pub x_order: u8,
    pub t_order: u8,
}

impl JetSpec {
    pub const VALUE: JetSpec = JetSpec { x_order: 0, t_order: 0 };

    pub fn new(x_order: u8, t_order: u8) -> Self {
        Self {
            x_order: x_order.min(2),
            t_order: t_order.min(2),
        }
    }

    fn streams(&self) -> Streams {
        let mut n = 1;
        let mut slot = |on: bool| {
            if on {
                n += 1;
                Some(n - 1)
            } else {
                None
            }
        };
        let x = slot(self.x_order >= 1);
        let xx = slot(self.x_order >= 2);
        let t = slot(self.t_order >= 1);
        let tt = slot(self.t_order >= 2);
        Streams { n, x, xx, t, tt }
    }
}

#[derive(Debug, Clone, Copy)]
struct Streams {
    n: usize,
    x: Option<usize>,
    xx: Option<usize>,
    t: Option<usize>,
    tt: Option<usize>,
}

impl Streams {
    /// (first, optional second) stream pairs per active direction, with the
    /// input channel each direction differentiates.
    fn directions(&self) -> impl Iterator<Item = (usize, usize, Option<usize>)> {
        [(0usize, self.x, self.xx), (1usize, self.t, self.tt)]
            .into_iter()
            .filter_map(|(ch, d, dd)| d.map(|d| (ch, d, dd)))
    }
}

/// Scratch buffers for one chunk. Reused across iterations to avoid
/// reallocating the per-layer stream matrices.
#[derive(Debug, Default)]
pub struct JetWorkspace {
    /// activations entering each layer, streams stacked along columns
    acts: Vec<Array2<f64>>,
    /// pre-activations of each hidden layer
    pre: Vec<Array2<f64>>,
    out: Array2<f64>,
    seeds: Array2<f64>,
    adj: Vec<Array2<f64>>,
    layout: Option<(Vec<usize>, usize, JetSpec)>,
}

/// Points per chunk; keeps the stacked stream matrices cache resident.
pub const CHUNK: usize = 64;

impl NetworkParams {
    /// Forward a chunk of points (rows of `inputs`, physical coordinates)
    /// and return the raw jets. Keeps intermediate state in `ws` for a
    /// following [`NetworkParams::jet_backward`].
    pub fn jet_forward(
        &self,
        inputs: ArrayView2<f64>,
        spec: JetSpec,
        ws: &mut JetWorkspace,
    ) -> Result<Vec<Jet<f64>>, NetworkError> {
        let (b, dim) = inputs.dim();
        if dim != self.input_dim() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.input_dim(),
                got: dim,
            });
        }
        let st = spec.streams();
        if spec.t_order > 0 && dim < 2 {
            return Err(NetworkError::DimensionMismatch { expected: 2, got: dim });
        }
        self.prepare(ws, b, spec);
        let sn = st.n;
        let nl = self.num_layers();

        // input layer: value block holds mapped coordinates, first-derivative
        // blocks hold the constant seed scaled by the input map
        {
            let a0 = &mut ws.acts[0];
            a0.fill(0.0);
            for p in 0..b {
                for c in 0..dim {
                    a0[[c, p]] = self.input_map.apply(c, inputs[[p, c]]);
                }
            }
            for (ch, d, _) in st.directions() {
                a0.slice_mut(s![ch, d * b..(d + 1) * b]).fill(self.input_map.scale[ch]);
            }
        }

        for l in 0..nl {
            let w = &self.weights[l];
            let (acts, rest) = ws.acts.split_at_mut(l + 1);
            let input = &acts[l];
            let z = if l + 1 < nl { &mut ws.pre[l] } else { &mut ws.out };
            general_mat_mul(1.0, w, input, 0.0, z);
            let bias = &self.biases[l];
            z.slice_mut(s![.., 0..b])
                .axis_iter_mut(Axis(0))
                .zip(bias.iter())
                .for_each(|(mut row, &bv)| row.iter_mut().for_each(|v| *v += bv));
            if l + 1 == nl {
                break;
            }
            let a = &mut rest[0];
            let zv = z.slice(s![.., 0..b]);
            Zip::from(a.slice_mut(s![.., 0..b])).and(&zv).for_each(|h, &zz| *h = super::activation::tanh(zz));
            for (_, d, dd) in st.directions() {
                let (hv, mut hd) = {
                    let (left, right) = a.view_mut().split_at(Axis(1), d * b);
                    (left.slice_move(s![.., 0..b]), right.slice_move(s![.., 0..b]))
                };
                let zd = z.slice(s![.., d * b..(d + 1) * b]);
                Zip::from(&mut hd).and(&hv).and(&zd).for_each(|o, &h, &zdv| {
                    *o = (1.0 - h * h) * zdv;
                });
                if let Some(dd) = dd {
                    let zdd = z.slice(s![.., dd * b..(dd + 1) * b]);
                    let (hv, mut hdd) = {
                        let (left, right) = a.view_mut().split_at(Axis(1), dd * b);
                        (left.slice_move(s![.., 0..b]), right.slice_move(s![.., 0..b]))
                    };
                    Zip::from(&mut hdd).and(&hv).and(&zd).and(&zdd).for_each(|o, &h, &zdv, &zddv| {
                        let g = 1.0 - h * h;
                        *o = g * zddv - 2.0 * h * g * zdv * zdv;
                    });
                }
            }
        }

        let out = &ws.out;
        let get = |k: Option<usize>, p: usize| k.map(|k| out[[0, k * b + p]]).unwrap_or(0.0);
        debug_assert_eq!(out.ncols(), sn * b);
        Ok((0..b)
            .map(|p| Jet {
                u: out[[0, p]],
                u_x: get(st.x, p),
                u_xx: get(st.xx, p),
                u_t: get(st.t, p),
                u_tt: get(st.tt, p),
            })
            .collect())
    }

    fn prepare(&self, ws: &mut JetWorkspace, b: usize, spec: JetSpec) {
        let sn = spec.streams().n;
        if let Some((sizes, chunk, sp)) = &ws.layout {
            if *sizes == self.layer_sizes && *chunk == b && *sp == spec {
                return;
            }
        }
        let nl = self.num_layers();
        ws.acts = (0..nl).map(|l| Array2::zeros((self.layer_sizes[l], sn * b))).collect();
        ws.pre = (0..nl - 1).map(|l| Array2::zeros((self.layer_sizes[l + 1], sn * b))).collect();
        ws.adj = (0..nl).map(|l| Array2::zeros((self.layer_sizes[l + 1], sn * b))).collect();
        ws.out = Array2::zeros((self.layer_sizes[nl], sn * b));
        ws.seeds = Array2::zeros((1, sn * b));
        ws.layout = Some((self.layer_sizes.clone(), b, spec));
    }

    /// Reverse pass for the chunk last forwarded through `ws`. `seeds[p]`
    /// holds `∂L/∂(raw jet)` of point `p`; gradients are added into `grads`.
    pub fn jet_backward(&self, ws: &mut JetWorkspace, seeds: &[Jet<f64>], grads: &mut NetworkParams) {
        let (b, spec) = match &ws.layout {
            Some((_, b, spec)) => (*b, *spec),
            None => panic!("jet_forward must run before jet_backward"),
        };
        assert_eq!(seeds.len(), b, "one seed per forwarded point");
        assert_eq!(self.layer_sizes[self.num_layers()], 1, "scalar output network");
        let st = spec.streams();
        let nl = self.num_layers();
        {
            let sd = &mut ws.seeds;
            for (p, s) in seeds.iter().enumerate() {
                sd[[0, p]] = s.u;
                if let Some(k) = st.x {
                    sd[[0, k * b + p]] = s.u_x;
                }
                if let Some(k) = st.xx {
                    sd[[0, k * b + p]] = s.u_xx;
                }
                if let Some(k) = st.t {
                    sd[[0, k * b + p]] = s.u_t;
                }
                if let Some(k) = st.tt {
                    sd[[0, k * b + p]] = s.u_tt;
                }
            }
        }

        // adjoint of the output pre-activation is the seed itself
        ws.adj[nl - 1].assign(&ws.seeds);
        for l in (0..nl).rev() {
            let zbar = &ws.adj[l];
            // dW += Z̄ Aᵀ, db += Σ value block
            general_mat_mul(1.0, zbar, &ws.acts[l].t(), 1.0, &mut grads.weights[l]);
            for (gb, row) in grads.biases[l].iter_mut().zip(zbar.slice(s![.., 0..b]).axis_iter(Axis(0))) {
                *gb += row.sum();
            }
            if l == 0 {
                break;
            }
            // Ā = Wᵀ Z̄ is the adjoint of the activations entering layer l,
            // i.e. of the post-tanh streams of hidden layer l-1.
            let (lower, upper) = ws.adj.split_at_mut(l);
            let hbar = &mut lower[l - 1];
            general_mat_mul(1.0, &self.weights[l].t(), &upper[0], 0.0, hbar);
            let h = &ws.acts[l];
            let z = &ws.pre[l - 1];
            tanh_stream_adjoint(hbar, h, z, &st, b);
        }
    }
}

/// Convert the adjoint of post-activation streams into the adjoint of the
/// pre-activation streams, in place.
///
/// With `g = 1 − h²`: `h_d = g z_d`, `h_dd = g z_dd − 2 h g z_d²`.
fn tanh_stream_adjoint(bar: &mut Array2<f64>, h: &Array2<f64>, z: &Array2<f64>, st: &Streams, b: usize) {
    let rows = bar.nrows();
    let dirs: Vec<(usize, Option<usize>)> = st.directions().map(|(_, d, dd)| (d, dd)).collect();
    for r in 0..rows {
        let mut brow = bar.row_mut(r);
        let hrow = h.row(r);
        let zrow = z.row(r);
        let bs = brow.as_slice_mut().expect("contiguous rows");
        let hs = hrow.as_slice().expect("contiguous rows");
        let zs = zrow.as_slice().expect("contiguous rows");
        for p in 0..b {
            let hv = hs[p];
            let g = 1.0 - hv * hv;
            let mut hv_bar = bs[p];
            for &(d, dd) in &dirs {
                let zd = zs[d * b + p];
                let hd_bar = bs[d * b + p];
                hv_bar += -2.0 * hv * zd * hd_bar;
                match dd {
                    Some(dd) => {
                        let zdd = zs[dd * b + p];
                        let hdd_bar = bs[dd * b + p];
                        hv_bar += hdd_bar * (-2.0 * hv * zdd - 2.0 * zd * zd * (g - 2.0 * hv * hv));
                        bs[d * b + p] = g * (hd_bar - 4.0 * hv * zd * hdd_bar);
                        bs[dd * b + p] = g * hdd_bar;
                    }
                    None => bs[d * b + p] = g * hd_bar,
                }
            }
            bs[p] = g * hv_bar;
        }
    }
}
