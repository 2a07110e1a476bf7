use crate::param::Param;

/// Softmax cross-entropy averaged over the batch. Returns the loss, the
/// gradient w.r.t. the logits and the number of correct argmax predictions.
pub fn softmax_cross_entropy(logits: &[f32], classes: usize, labels: &[usize]) -> (f32, Vec<f32>, usize) {
    let n = labels.len();
    assert_eq!(logits.len(), n * classes);
    let mut grad = vec![0.0f32; logits.len()];
    let mut loss = 0.0f64;
    let mut correct = 0;
    for (b, &y) in labels.iter().enumerate() {
        let row = &logits[b * classes..(b + 1) * classes];
        let max = row.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
        let exp: Vec<f64> = row.iter().map(|&v| f64::from(v - max).exp()).collect();
        let sum: f64 = exp.iter().sum();
        loss -= (exp[y] / sum).ln();
        let pred = row
            .iter()
            .enumerate()
            .fold(0, |best, (k, &v)| if v > row[best] { k } else { best });
        if pred == y {
            correct += 1;
        }
        for k in 0..classes {
            let p = exp[k] / sum;
            grad[b * classes + k] = ((p - if k == y { 1.0 } else { 0.0 }) / n as f64) as f32;
        }
    }
    ((loss / n as f64) as f32, grad, correct)
}

/// SGD with momentum and L2 weight decay, in the usual deep-learning form:
/// `v ← μ·v + (g + λ·w)`, `w ← w − lr·v`.
#[derive(Clone, Debug)]
pub struct Sgd {
    pub momentum: f32,
    pub weight_decay: f32,
    velocity: Vec<Vec<f32>>,
}

impl Sgd {
    pub fn new(momentum: f32, weight_decay: f32) -> Self {
        Sgd {
            momentum,
            weight_decay,
            velocity: Vec::new(),
        }
    }

    pub fn step(&mut self, params: &mut [Param], lr: f32) {
        if self.velocity.len() != params.len() {
            self.velocity = params.iter().map(|p| vec![0.0; p.value.len()]).collect();
        }
        for (p, v) in params.iter_mut().zip(&mut self.velocity) {
            for ((w, g), m) in p.value.iter_mut().zip(&p.grad).zip(v.iter_mut()) {
                let d = g + self.weight_decay * *w;
                *m = self.momentum * *m + d;
                *w -= lr * *m;
            }
        }
    }
}

/// Step decay: the rate is multiplied by `gamma` after each milestone epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiStepLr {
    pub base: f32,
    pub milestones: Vec<usize>,
    pub gamma: f32,
}

impl MultiStepLr {
    /// Learning rate used during 1-based `epoch`.
    pub fn lr_at(&self, epoch: usize) -> f32 {
        let drops = self.milestones.iter().filter(|&&m| m < epoch).count();
        self.base * self.gamma.powi(drops as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::ParamRole;
    use approx::assert_relative_eq;

    #[test]
    fn step_decay_boundaries() {
        let s = MultiStepLr { base: 0.1, milestones: vec![60, 120], gamma: 0.1 };
        assert_relative_eq!(s.lr_at(1), 0.1);
        assert_relative_eq!(s.lr_at(60), 0.1);
        assert_relative_eq!(s.lr_at(61), 0.01, max_relative = 1e-6);
        assert_relative_eq!(s.lr_at(121), 0.001, max_relative = 1e-6);
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let logits = vec![0.3f32, -1.2, 0.8, 0.1, 0.5, -0.4];
        let labels = [2usize, 0];
        let (_, grad, _) = softmax_cross_entropy(&logits, 3, &labels);
        for i in 0..logits.len() {
            let mut up = logits.clone();
            let mut dn = logits.clone();
            up[i] += 1e-3;
            dn[i] -= 1e-3;
            let fd = (softmax_cross_entropy(&up, 3, &labels).0 - softmax_cross_entropy(&dn, 3, &labels).0) / 2e-3;
            assert!((fd - grad[i]).abs() < 1e-3, "{i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn sgd_momentum_and_decay() {
        let mut p = [Param::new("w", ParamRole::LinearBias { features: 1 }, vec![1.0])];
        p[0].grad[0] = 0.5;
        let mut opt = Sgd::new(0.9, 0.1);
        opt.step(&mut p, 0.1);
        assert_relative_eq!(p[0].value[0], 1.0 - 0.1 * 0.6);
        opt.step(&mut p, 0.1);
        let v = 0.9 * 0.6 + (0.5 + 0.1 * 0.94);
        assert_relative_eq!(p[0].value[0], 0.94 - 0.1 * v, max_relative = 1e-6);
    }
}
