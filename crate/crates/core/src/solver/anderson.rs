//! Type-II Anderson acceleration for fixed-point iterations `w ← T(w)`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::linalg::RVec;

#[derive(Debug, Clone)]
pub(crate) struct Anderson {
    memory: usize,
    dg: VecDeque<RVec>,
    df: VecDeque<RVec>,
    last: Option<(RVec, RVec)>,
}

impl Anderson {
    pub(crate) fn new(memory: usize) -> Self {
        Self { memory, dg: VecDeque::new(), df: VecDeque::new(), last: None }
    }

    pub(crate) fn reset(&mut self) {
        self.dg.clear();
        self.df.clear();
        self.last = None;
    }

    /// Next iterate from the current point `w` and its image `g = T(w)`.
    pub(crate) fn step(&mut self, w: &RVec, g: &RVec) -> RVec {
        let f = g - w;
        if let Some((g0, f0)) = self.last.take() {
            self.dg.push_back(g - g0);
            self.df.push_back(&f - f0);
            if self.dg.len() > self.memory {
                self.dg.pop_front();
                self.df.pop_front();
            }
        }
        self.last = Some((g.clone(), f.clone()));
        let k = self.df.len();
        if k == 0 {
            return g.clone();
        }
        let mut gram = DMatrix::<f64>::from_fn(k, k, |i, j| self.df[i].dot(&self.df[j]));
        let reg = 1e-10 * gram.trace().max(1e-300);
        for i in 0..k {
            gram[(i, i)] += reg;
        }
        let rhs = DVector::<f64>::from_fn(k, |i, _| self.df[i].dot(&f));
        let Some(gamma) = gram.cholesky().map(|c| c.solve(&rhs)) else {
            self.reset();
            return g.clone();
        };
        let mut next = g.clone();
        for (gi, dgi) in gamma.iter().zip(&self.dg) {
            next.axpy(-gi, dgi, 1.0);
        }
        if next.iter().all(|v| v.is_finite()) {
            next
        } else {
            self.reset();
            g.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accelerates_a_slow_linear_contraction() {
        // T(w) = A w + b with spectral radius 0.999
        let a = DMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![0.999, 0.5, -0.9, 0.99]));
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let fixed = DVector::from_fn(4, |i, _| b[i] / (1.0 - a[(i, i)]));
        let mut w = DVector::zeros(4);
        let mut aa = Anderson::new(5);
        for _ in 0..50 {
            let g = &a * &w + &b;
            w = aa.step(&w, &g);
        }
        assert!((w - fixed).norm() < 1e-8);
    }
}
