//! Layers with hand-written backward passes.
//!
//! Layers reference their parameters and buffers by index into the owning
//! network's arenas, and cache whatever the backward pass needs during a
//! training-mode forward pass.

use crate::param::{Buffer, Param};
use crate::tensor::Tensor;

/// Grouped 2-D convolution. Ordinary, depthwise and pointwise convolutions
/// are special cases.
#[derive(Clone, Debug)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    pub groups: usize,
    pub weight: usize,
    pub bias: Option<usize>,
    input: Option<Tensor>,
}

/// Output positions `o` with `o*stride + offset - pad` inside `[0, len)`.
fn valid_range(len: usize, out: usize, stride: usize, offset: usize, pad: usize) -> (usize, usize) {
    let shift = offset as isize - pad as isize;
    let s = stride as isize;
    let lo = if shift >= 0 { 0 } else { ((-shift) + s - 1) / s };
    let hi_num = len as isize - 1 - shift;
    let hi = if hi_num < 0 { 0 } else { hi_num / s + 1 };
    (lo.max(0) as usize, (hi as usize).min(out))
}

impl Conv2d {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        groups: usize,
        weight: usize,
        bias: Option<usize>,
    ) -> Self {
        assert!(in_channels.is_multiple_of(groups) && out_channels.is_multiple_of(groups));
        Conv2d {
            in_channels,
            out_channels,
            kernel,
            stride,
            padding,
            groups,
            weight,
            bias,
            input: None,
        }
    }

    pub fn output_size(&self, h: usize, w: usize) -> (usize, usize) {
        (
            (h + 2 * self.padding - self.kernel) / self.stride + 1,
            (w + 2 * self.padding - self.kernel) / self.stride + 1,
        )
    }

    pub fn forward(&mut self, params: &[Param], x: Tensor, train: bool) -> Tensor {
        assert_eq!(x.c, self.in_channels, "conv input channels");
        let (oh, ow) = self.output_size(x.h, x.w);
        let mut out = Tensor::zeros(x.n, self.out_channels, oh, ow);
        let w = &params[self.weight].value;
        let k = self.kernel;
        let icg = self.in_channels / self.groups;
        let ocg = self.out_channels / self.groups;
        let (s, p) = (self.stride, self.padding);
        for b in 0..x.n {
            for oc in 0..self.out_channels {
                let g = oc / ocg;
                let o_off = (b * self.out_channels + oc) * oh * ow;
                let orow_all = &mut out.data[o_off..o_off + oh * ow];
                if let Some(bias) = self.bias {
                    orow_all.fill(params[bias].value[oc]);
                }
                for icl in 0..icg {
                    let ic = g * icg + icl;
                    let x_off = (b * x.c + ic) * x.h * x.w;
                    let w_off = (oc * icg + icl) * k * k;
                    for kh in 0..k {
                        let (y0, y1) = valid_range(x.h, oh, s, kh, p);
                        for kw in 0..k {
                            let wv = w[w_off + kh * k + kw];
                            let (x0, x1) = valid_range(x.w, ow, s, kw, p);
                            for oy in y0..y1 {
                                let iy = oy * s + kh - p;
                                let xrow = x_off + iy * x.w;
                                let orow = oy * ow;
                                for ox in x0..x1 {
                                    let ix = ox * s + kw - p;
                                    orow_all[orow + ox] += wv * x.data[xrow + ix];
                                }
                            }
                        }
                    }
                }
            }
        }
        if train {
            self.input = Some(x);
        }
        out
    }

    pub fn backward(&mut self, params: &mut [Param], grad: Tensor) -> Tensor {
        let x = self.input.take().expect("conv backward without cached input");
        let (oh, ow) = (grad.h, grad.w);
        let k = self.kernel;
        let icg = self.in_channels / self.groups;
        let ocg = self.out_channels / self.groups;
        let (s, p) = (self.stride, self.padding);
        let mut gx = Tensor::zeros_like(&x);
        let mut gw = vec![0.0f32; params[self.weight].value.len()];
        {
            let w = &params[self.weight].value;
            for b in 0..x.n {
                for oc in 0..self.out_channels {
                    let g = oc / ocg;
                    let o_off = (b * self.out_channels + oc) * oh * ow;
                    let go = &grad.data[o_off..o_off + oh * ow];
                    for icl in 0..icg {
                        let ic = g * icg + icl;
                        let x_off = (b * x.c + ic) * x.h * x.w;
                        let w_off = (oc * icg + icl) * k * k;
                        for kh in 0..k {
                            let (y0, y1) = valid_range(x.h, oh, s, kh, p);
                            for kw in 0..k {
                                let wv = w[w_off + kh * k + kw];
                                let (x0, x1) = valid_range(x.w, ow, s, kw, p);
                                let mut acc = 0.0f32;
                                for oy in y0..y1 {
                                    let iy = oy * s + kh - p;
                                    let xrow = x_off + iy * x.w;
                                    let orow = oy * ow;
                                    for ox in x0..x1 {
                                        let ix = ox * s + kw - p;
                                        let g_o = go[orow + ox];
                                        acc += g_o * x.data[xrow + ix];
                                        gx.data[xrow + ix] += wv * g_o;
                                    }
                                }
                                gw[w_off + kh * k + kw] += acc;
                            }
                        }
                    }
                }
            }
        }
        accumulate(&mut params[self.weight].grad, &gw);
        if let Some(bias) = self.bias {
            let gb = &mut params[bias].grad;
            for b in 0..grad.n {
                for oc in 0..self.out_channels {
                    let o_off = (b * self.out_channels + oc) * oh * ow;
                    gb[oc] += grad.data[o_off..o_off + oh * ow].iter().sum::<f32>();
                }
            }
        }
        gx
    }
}

fn accumulate(dst: &mut [f32], src: &[f32]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

#[derive(Clone, Debug)]
pub struct BatchNorm2d {
    pub channels: usize,
    pub weight: usize,
    pub bias: usize,
    pub running_mean: usize,
    pub running_var: usize,
    pub momentum: f32,
    pub eps: f32,
    cache: Option<(Vec<f32>, Vec<f32>)>,
}

impl BatchNorm2d {
    pub fn new(channels: usize, weight: usize, bias: usize, running_mean: usize, running_var: usize) -> Self {
        BatchNorm2d {
            channels,
            weight,
            bias,
            running_mean,
            running_var,
            momentum: 0.1,
            eps: 1e-5,
            cache: None,
        }
    }

    pub fn forward(&mut self, params: &[Param], buffers: &mut [Buffer], mut x: Tensor, train: bool) -> Tensor {
        assert_eq!(x.c, self.channels, "batch-norm channels");
        let plane = x.plane();
        let count = (x.n * plane) as f32;
        let gamma = &params[self.weight].value;
        let beta = &params[self.bias].value;
        if !train {
            let rm = &buffers[self.running_mean].value;
            let rv = &buffers[self.running_var].value;
            for b in 0..x.n {
                for c in 0..self.channels {
                    let inv = 1.0 / (rv[c] + self.eps).sqrt();
                    let off = (b * x.c + c) * plane;
                    for v in &mut x.data[off..off + plane] {
                        *v = gamma[c] * (*v - rm[c]) * inv + beta[c];
                    }
                }
            }
            return x;
        }
        let mut xhat = vec![0.0f32; x.data.len()];
        let mut inv_std = vec![0.0f32; self.channels];
        for c in 0..self.channels {
            let mut mean = 0.0f64;
            for b in 0..x.n {
                let off = (b * x.c + c) * plane;
                mean += x.data[off..off + plane].iter().map(|&v| f64::from(v)).sum::<f64>();
            }
            mean /= f64::from(count);
            let mut var = 0.0f64;
            for b in 0..x.n {
                let off = (b * x.c + c) * plane;
                var += x.data[off..off + plane]
                    .iter()
                    .map(|&v| (f64::from(v) - mean).powi(2))
                    .sum::<f64>();
            }
            var /= f64::from(count);
            let inv = 1.0 / (var as f32 + self.eps).sqrt();
            inv_std[c] = inv;
            let mean = mean as f32;
            for b in 0..x.n {
                let off = (b * x.c + c) * plane;
                for i in off..off + plane {
                    let h = (x.data[i] - mean) * inv;
                    xhat[i] = h;
                    x.data[i] = gamma[c] * h + beta[c];
                }
            }
            let unbiased = if count > 1.0 { var as f32 * count / (count - 1.0) } else { var as f32 };
            let m = self.momentum;
            let rm = &mut buffers[self.running_mean].value[c];
            *rm = (1.0 - m) * *rm + m * mean;
            let rv = &mut buffers[self.running_var].value[c];
            *rv = (1.0 - m) * *rv + m * unbiased;
        }
        self.cache = Some((xhat, inv_std));
        x
    }

    pub fn backward(&mut self, params: &mut [Param], grad: Tensor) -> Tensor {
        let (xhat, inv_std) = self.cache.take().expect("batch-norm backward without cache");
        let plane = grad.plane();
        let count = (grad.n * plane) as f32;
        let mut gx = Tensor::zeros_like(&grad);
        let mut dgamma = vec![0.0f32; self.channels];
        let mut dbeta = vec![0.0f32; self.channels];
        for c in 0..self.channels {
            for b in 0..grad.n {
                let off = (b * grad.c + c) * plane;
                for i in off..off + plane {
                    dbeta[c] += grad.data[i];
                    dgamma[c] += grad.data[i] * xhat[i];
                }
            }
        }
        let gamma = &params[self.weight].value;
        for c in 0..self.channels {
            let scale = gamma[c] * inv_std[c] / count;
            for b in 0..grad.n {
                let off = (b * grad.c + c) * plane;
                for i in off..off + plane {
                    gx.data[i] = scale * (count * grad.data[i] - dbeta[c] - xhat[i] * dgamma[c]);
                }
            }
        }
        accumulate(&mut params[self.weight].grad, &dgamma);
        accumulate(&mut params[self.bias].grad, &dbeta);
        gx
    }
}

#[derive(Clone, Debug, Default)]
pub struct Relu {
    output: Option<Tensor>,
}

impl Relu {
    pub fn forward(&mut self, mut x: Tensor, train: bool) -> Tensor {
        for v in &mut x.data {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        if train {
            self.output = Some(x.clone());
        }
        x
    }

    pub fn backward(&mut self, mut grad: Tensor) -> Tensor {
        let out = self.output.take().expect("relu backward without cache");
        for (g, &o) in grad.data.iter_mut().zip(&out.data) {
            if o <= 0.0 {
                *g = 0.0;
            }
        }
        grad
    }
}

#[derive(Clone, Debug, Default)]
pub struct GlobalAvgPool {
    spatial: Option<(usize, usize)>,
}

impl GlobalAvgPool {
    pub fn forward(&mut self, x: Tensor, train: bool) -> Tensor {
        let plane = x.plane();
        let mut out = Tensor::zeros(x.n, x.c, 1, 1);
        for (o, chunk) in out.data.iter_mut().zip(x.data.chunks_exact(plane)) {
            *o = chunk.iter().sum::<f32>() / plane as f32;
        }
        if train {
            self.spatial = Some((x.h, x.w));
        }
        out
    }

    pub fn backward(&mut self, grad: Tensor) -> Tensor {
        let (h, w) = self.spatial.take().expect("pool backward without cache");
        let plane = h * w;
        let mut gx = Tensor::zeros(grad.n, grad.c, h, w);
        for (chunk, &g) in gx.data.chunks_exact_mut(plane).zip(&grad.data) {
            chunk.fill(g / plane as f32);
        }
        gx
    }
}

/// Fully-connected layer over flattened samples, output shaped `[n, out, 1, 1]`.
#[derive(Clone, Debug)]
pub struct Linear {
    pub in_features: usize,
    pub out_features: usize,
    pub weight: usize,
    pub bias: usize,
    input: Option<Tensor>,
}

impl Linear {
    pub fn new(in_features: usize, out_features: usize, weight: usize, bias: usize) -> Self {
        Linear {
            in_features,
            out_features,
            weight,
            bias,
            input: None,
        }
    }

    pub fn forward(&mut self, params: &[Param], x: Tensor, train: bool) -> Tensor {
        assert_eq!(x.sample_len(), self.in_features, "linear input features");
        let w = &params[self.weight].value;
        let bias = &params[self.bias].value;
        let mut out = Tensor::zeros(x.n, self.out_features, 1, 1);
        for b in 0..x.n {
            let xi = &x.data[b * self.in_features..(b + 1) * self.in_features];
            for o in 0..self.out_features {
                let wr = &w[o * self.in_features..(o + 1) * self.in_features];
                out.data[b * self.out_features + o] =
                    bias[o] + wr.iter().zip(xi).map(|(a, b)| a * b).sum::<f32>();
            }
        }
        if train {
            self.input = Some(x);
        }
        out
    }

    pub fn backward(&mut self, params: &mut [Param], grad: Tensor) -> Tensor {
        let x = self.input.take().expect("linear backward without cache");
        let (fi, fo) = (self.in_features, self.out_features);
        let mut gx = Tensor::zeros_like(&x);
        let mut gw = vec![0.0f32; fi * fo];
        let mut gb = vec![0.0f32; fo];
        {
            let w = &params[self.weight].value;
            for b in 0..x.n {
                let xi = &x.data[b * fi..(b + 1) * fi];
                for o in 0..fo {
                    let g = grad.data[b * fo + o];
                    gb[o] += g;
                    let wr = &w[o * fi..(o + 1) * fi];
                    let gwr = &mut gw[o * fi..(o + 1) * fi];
                    let gxi = &mut gx.data[b * fi..(b + 1) * fi];
                    for i in 0..fi {
                        gwr[i] += g * xi[i];
                        gxi[i] += g * wr[i];
                    }
                }
            }
        }
        accumulate(&mut params[self.weight].grad, &gw);
        accumulate(&mut params[self.bias].grad, &gb);
        gx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_range_matches_brute_force() {
        for len in 1..8 {
            for stride in 1..3 {
                for pad in 0..2 {
                    for kernel in 1..4 {
                        if len + 2 * pad < kernel {
                            continue;
                        }
                        let out = (len + 2 * pad - kernel) / stride + 1;
                        for offset in 0..kernel {
                            let brute: Vec<usize> = (0..out)
                                .filter(|&o| {
                                    let i = (o * stride + offset) as isize - pad as isize;
                                    i >= 0 && (i as usize) < len
                                })
                                .collect();
                            let (lo, hi) = valid_range(len, out, stride, offset, pad);
                            assert_eq!((lo..hi).collect::<Vec<_>>(), brute);
                        }
                    }
                }
            }
        }
    }

    use crate::param::ParamRole;

    fn lcg(seed: &mut u64) -> f32 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 40) as f32 / (1u64 << 24) as f32) * 2.0 - 1.0
    }

    fn random(n: usize, seed: &mut u64) -> Vec<f32> {
        (0..n).map(|_| lcg(seed)).collect()
    }

    /// Linear probe loss `sum(out · r)`; its input and parameter gradients
    /// are checked by central differences.
    fn probe<F>(mut params: Vec<Param>, x: Tensor, mut layer: F)
    where
        F: FnMut(&mut Vec<Param>, Tensor, bool) -> Tensor,
    {
        let mut seed = 99;
        let out = layer(&mut params, x.clone(), false);
        let r = random(out.data.len(), &mut seed);
        let loss = |params: &mut Vec<Param>, x: &Tensor, layer: &mut F| -> f64 {
            let o = layer(params, x.clone(), false);
            o.data.iter().zip(&r).map(|(a, b)| f64::from(a * b)).sum()
        };
        layer(&mut params, x.clone(), true);
        let gx = layer(&mut params, Tensor::from_vec(out.n, out.c, out.h, out.w, r.clone()), true);
        let eps = 1e-2;
        for i in (0..x.data.len()).step_by(7) {
            let mut up = x.clone();
            up.data[i] += eps;
            let mut dn = x.clone();
            dn.data[i] -= eps;
            let fd = (loss(&mut params, &up, &mut layer) - loss(&mut params, &dn, &mut layer)) / (2.0 * f64::from(eps));
            assert!((fd - f64::from(gx.data[i])).abs() < 2e-3, "input {i}: {fd} vs {}", gx.data[i]);
        }
        for pi in 0..params.len() {
            for i in (0..params[pi].value.len()).step_by(5) {
                let g = params[pi].grad[i];
                params[pi].value[i] += eps;
                let up = loss(&mut params, &x, &mut layer);
                params[pi].value[i] -= 2.0 * eps;
                let dn = loss(&mut params, &x, &mut layer);
                params[pi].value[i] += eps;
                let fd = (up - dn) / (2.0 * f64::from(eps));
                assert!((fd - f64::from(g)).abs() < 2e-3, "param {pi}[{i}]: {fd} vs {g}");
            }
        }
    }

    #[test]
    fn conv_backward_matches_finite_differences() {
        for &(cin, cout, k, stride, groups) in &[(3, 4, 3, 1, 1), (4, 4, 3, 2, 4), (4, 6, 1, 1, 1), (4, 6, 3, 2, 2)] {
            let mut seed = 1;
            let role = ParamRole::ConvWeight { out_channels: cout, in_channels: cin, kernel: k, groups };
            let w = Param::new("w", role, random(role.len(), &mut seed));
            let b = Param::new("b", ParamRole::ConvBias { channels: cout }, random(cout, &mut seed));
            let x = Tensor::from_vec(2, cin, 5, 6, random(2 * cin * 30, &mut seed));
            let mut conv = Conv2d::new(cin, cout, k, stride, k / 2, groups, 0, Some(1));
            probe(vec![w, b], x, |p, t, back| {
                if back {
                    if t.c == cout && conv.input.is_some() {
                        p.iter_mut().for_each(Param::zero_grad);
                        return conv.backward(p, t);
                    }
                    return conv.forward(p, t, true);
                }
                conv.forward(p, t, false)
            });
        }
    }

    #[test]
    fn batch_norm_backward_matches_finite_differences() {
        let mut seed = 5;
        let c = 3;
        let w = Param::new("w", ParamRole::BnWeight { channels: c }, random(c, &mut seed));
        let b = Param::new("b", ParamRole::BnBias { channels: c }, random(c, &mut seed));
        let mut buffers = vec![
            Buffer { name: "m".into(), value: vec![0.0; c] },
            Buffer { name: "v".into(), value: vec![1.0; c] },
        ];
        let x = Tensor::from_vec(2, c, 3, 3, random(2 * c * 9, &mut seed));
        let mut bn = BatchNorm2d::new(c, 0, 1, 0, 1);
        let mut pending = false;
        probe(vec![w, b], x, |p, t, back| {
            if back && pending {
                pending = false;
                p.iter_mut().for_each(Param::zero_grad);
                return bn.backward(p, t);
            }
            pending = back;
            bn.forward(p, &mut buffers, t, true)
        });
    }
}

