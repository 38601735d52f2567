use std::fmt::Write as _;
use std::io::{BufRead, Write};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::NetworkError;
use crate::autodiff::Real;

/// Affine map from physical input coordinates to the network's input space:
/// `a_i = (x_i - center_i) * scale_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputMap {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl InputMap {
    pub fn identity(dim: usize) -> Self {
        Self {
            center: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    /// Map the box `[lo_i, hi_i]` onto `[-1, 1]` per channel.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Result<Self, NetworkError> {
        if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            return Err(NetworkError::InvalidInputBox);
        }
        Ok(Self {
            center: lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            scale: lo.iter().zip(hi).map(|(a, b)| 2.0 / (b - a)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    #[inline]
    pub fn apply(&self, channel: usize, x: f64) -> f64 {
        (x - self.center[channel]) * self.scale[channel]
    }
}

/// Weights and biases of a fully-connected tanh network.
///
/// `weights[l]` is `layer_sizes[l+1] × layer_sizes[l]`, `biases[l]` has
/// `layer_sizes[l+1]` entries. Hidden layers use tanh, the output layer is
/// linear. The same type doubles as a gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub input_map: InputMap,
}

const SNAPSHOT_MAGIC: &str = "fboal-network-snapshot";
const SNAPSHOT_VERSION: u32 = 1;

/// Glorot-uniform weights (`±√(6/(fan_in+fan_out))`), zero biases.
pub fn init_network(layer_sizes: &[usize], seed: u64) -> Result<NetworkParams, NetworkError> {
    validate_sizes(layer_sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
    let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
    for w in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        weights.push(Array2::from_shape_fn((fan_out, fan_in), |_| rng.gen_range(-bound..bound)));
        biases.push(Array1::zeros(fan_out));
    }
    Ok(NetworkParams {
        layer_sizes: layer_sizes.to_vec(),
        weights,
        biases,
        input_map: InputMap::identity(layer_sizes[0]),
    })
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<(), NetworkError> {
    if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
        return Err(NetworkError::InvalidLayerSizes(layer_sizes.to_vec()));
    }
    Ok(())
}

impl NetworkParams {
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self, NetworkError> {
        validate_sizes(layer_sizes)?;
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights: layer_sizes.windows(2).map(|w| Array2::zeros((w[1], w[0]))).collect(),
            biases: layer_sizes.windows(2).map(|w| Array1::zeros(w[1])).collect(),
            input_map: InputMap::identity(layer_sizes[0]),
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layer_sizes: self.layer_sizes.clone(),
            weights: self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: self.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            input_map: self.input_map.clone(),
        }
    }

    pub fn with_input_map(mut self, map: InputMap) -> Result<Self, NetworkError> {
        if map.dim() != self.input_dim() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.input_dim(),
                got: map.dim(),
            });
        }
        self.input_map = map;
        Ok(self)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Parameters in canonical order: per layer, weights row-major then bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<(), NetworkError> {
        if flat.len() != self.num_params() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.num_params(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            w.iter_mut().chain(b.iter_mut()).for_each(|v| *v = *it.next().unwrap());
        }
        Ok(())
    }

    /// Mutable contiguous slices over every parameter block in canonical order.
    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            out.push(w.as_slice_mut().expect("weights are standard layout"));
            out.push(b.as_slice_mut().expect("biases are contiguous"));
        }
        out
    }

    pub fn blocks(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.push(w.as_slice().expect("weights are standard layout"));
            out.push(b.as_slice().expect("biases are contiguous"));
        }
        out
    }

    pub fn fill(&mut self, v: f64) {
        self.blocks_mut().into_iter().for_each(|b| b.fill(v));
    }

    pub fn all_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// Evaluate the network with parameters treated as constants.
    pub fn forward<T: Real>(&self, input: &[T]) -> Result<T, NetworkError> {
        self.forward_impl(input, |l, i, j| T::from_f64(self.weights[l][[i, j]]), |l, i| {
            T::from_f64(self.biases[l][i])
        })
    }

    /// Evaluate the network with externally supplied parameter values, given
    /// in the canonical flat order. Used to record parameters on a tape.
    pub fn forward_with<T: Real>(&self, flat: &[T], input: &[T]) -> Result<T, NetworkError> {
        if flat.len() != self.num_params() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.num_params(),
                got: flat.len(),
            });
        }
        let mut offsets = Vec::with_capacity(self.num_layers());
        let mut off = 0;
        for (w, b) in self.weights.iter().zip(&self.biases) {
            offsets.push(off);
            off += w.len() + b.len();
        }
        self.forward_impl(
            input,
            |l, i, j| flat[offsets[l] + i * self.layer_sizes[l] + j],
            |l, i| flat[offsets[l] + self.weights[l].len() + i],
        )
    }

    fn forward_impl<T: Real>(
        &self,
        input: &[T],
        weight: impl Fn(usize, usize, usize) -> T,
        bias: impl Fn(usize, usize) -> T,
    ) -> Result<T, NetworkError> {
        if input.len() != self.input_dim() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let map = &self.input_map;
        let mut act: Vec<T> = input
            .iter()
            .enumerate()
            .map(|(i, &x)| x.add_const(-map.center[i]).scale(map.scale[i]))
            .collect();
        let last = self.num_layers() - 1;
        for l in 0..self.num_layers() {
            let (n_out, n_in) = (self.layer_sizes[l + 1], self.layer_sizes[l]);
            let mut next = Vec::with_capacity(n_out);
            for i in 0..n_out {
                let mut z = bias(l, i);
                for (j, &a) in act.iter().enumerate().take(n_in) {
                    z = z + weight(l, i, j) * a;
                }
                next.push(if l == last { z } else { z.tanh() });
            }
            act = next;
        }
        Ok(act[0])
    }

    /// Write a versioned text snapshot: header, layer sizes, input map, then
    /// every weight matrix row by row followed by its bias vector.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let join = |v: &mut dyn Iterator<Item = f64>| {
            let mut s = String::new();
            for (k, x) in v.enumerate() {
                if k > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{x:?}");
            }
            s
        };
        writeln!(w, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}")?;
        let sizes: Vec<String> = self.layer_sizes.iter().map(|s| s.to_string()).collect();
        writeln!(w, "layers {}", sizes.join(" "))?;
        writeln!(w, "input_center {}", join(&mut self.input_map.center.iter().copied()))?;
        writeln!(w, "input_scale {}", join(&mut self.input_map.scale.iter().copied()))?;
        for (l, (wm, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            writeln!(w, "weight {l} {} {}", wm.nrows(), wm.ncols())?;
            for row in wm.rows() {
                writeln!(w, "{}", join(&mut row.iter().copied()))?;
            }
            writeln!(w, "bias {l} {}", b.len())?;
            writeln!(w, "{}", join(&mut b.iter().copied()))?;
        }
        Ok(())
    }

    pub fn read_snapshot<R: BufRead>(r: R) -> Result<Self, NetworkError> {
        let mut lines = r.lines();
        let mut next = || -> Result<String, NetworkError> {
            lines
                .next()
                .ok_or_else(|| NetworkError::Snapshot("unexpected end of file".into()))?
                .map_err(|e| NetworkError::Snapshot(e.to_string()))
        };
        let header = next()?;
        let mut h = header.split_whitespace();
        if h.next() != Some(SNAPSHOT_MAGIC) {
            return Err(NetworkError::Snapshot("missing snapshot header".into()));
        }
        let version: u32 = parse_tok(h.next())?;
        if version != SNAPSHOT_VERSION {
            return Err(NetworkError::Snapshot(format!("unsupported version {version}")));
        }
        let sizes: Vec<usize> = tagged(&next()?, "layers")?;
        let mut params = Self::zeros(&sizes)?;
        params.input_map.center = tagged(&next()?, "input_center")?;
        params.input_map.scale = tagged(&next()?, "input_scale")?;
        if params.input_map.center.len() != sizes[0] || params.input_map.scale.len() != sizes[0] {
            return Err(NetworkError::Snapshot("input map dimension mismatch".into()));
        }
        for l in 0..params.num_layers() {
            let dims: Vec<usize> = tagged(&next()?, "weight")?;
            if dims != [l, sizes[l + 1], sizes[l]] {
                return Err(NetworkError::Snapshot(format!("bad weight header for layer {l}")));
            }
            for i in 0..sizes[l + 1] {
                let row: Vec<f64> = parse_all(&next()?)?;
                if row.len() != sizes[l] {
                    return Err(NetworkError::Snapshot(format!("bad row {i} in layer {l}")));
                }
                params.weights[l].row_mut(i).iter_mut().zip(row).for_each(|(d, s)| *d = s);
            }
            let dims: Vec<usize> = tagged(&next()?, "bias")?;
            if dims != [l, sizes[l + 1]] {
                return Err(NetworkError::Snapshot(format!("bad bias header for layer {l}")));
            }
            let b: Vec<f64> = parse_all(&next()?)?;
            if b.len() != sizes[l + 1] {
                return Err(NetworkError::Snapshot(format!("bad bias in layer {l}")));
            }
            params.biases[l] = Array1::from(b);
        }
        if !params.all_finite() {
            return Err(NetworkError::NonFinite);
        }
        Ok(params)
    }
}

fn parse_tok<T: std::str::FromStr>(tok: Option<&str>) -> Result<T, NetworkError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| NetworkError::Snapshot("malformed number".into()))
}

fn parse_all<T: std::str::FromStr>(line: &str) -> Result<Vec<T>, NetworkError> {
    line.split_whitespace().map(|t| parse_tok(Some(t))).collect()
}

fn tagged<T: std::str::FromStr>(line: &str, tag: &str) -> Result<Vec<T>, NetworkError> {
    let rest = line
        .strip_prefix(tag)
        .ok_or_else(|| NetworkError::Snapshot(format!("expected `{tag}` line")))?;
    parse_all(rest)
}
