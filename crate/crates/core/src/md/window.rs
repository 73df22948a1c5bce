use crate::scalar::Scalar;

/// Ring buffer of the most recent flux vectors, used for the trailing time average.
#[derive(Clone, Debug)]
pub struct FluxWindow<T> {
    n: usize,
    capacity: usize,
    data: Vec<T>,
    head: usize,
    len: usize,
}

impl<T: Scalar> FluxWindow<T> {
    pub fn new(n: usize, capacity: usize) -> Self {
        assert!(capacity > 0, "window capacity must be positive");
        Self {
            n,
            capacity,
            data: vec![T::zero(); n * capacity],
            head: 0,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, phi: &[T]) {
        debug_assert_eq!(phi.len(), self.n);
        self.data[self.head * self.n..(self.head + 1) * self.n].copy_from_slice(phi);
        self.head = (self.head + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
    }

    fn slot(&self, back: usize) -> &[T] {
        let k = (self.head + self.capacity - 1 - back) % self.capacity;
        &self.data[k * self.n..(k + 1) * self.n]
    }

    /// Mean of the stored vectors. Deviations are summed relative to the newest
    /// entry, so a constant history averages back to itself exactly.
    pub fn mean(&self) -> Vec<T> {
        if self.len == 0 {
            return vec![T::zero(); self.n];
        }
        let newest = self.slot(0).to_vec();
        let mut dev = vec![T::zero(); self.n];
        for back in 1..self.len {
            for ((d, x), r) in dev.iter_mut().zip(self.slot(back)).zip(&newest) {
                *d += *x - *r;
            }
        }
        let count = T::of_usize(self.len);
        newest.iter().zip(&dev).map(|(r, d)| *r + *d / count).collect()
    }

    /// Largest `|phi_i|` over the stored history, per site.
    pub fn max_abs(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for back in 0..self.len {
            for (o, x) in out.iter_mut().zip(self.slot(back)) {
                *o = o.max(x.abs());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_history_is_exact() {
        let mut w = FluxWindow::<f64>::new(3, 100);
        let phi = [0.3, -0.7, 1.0 / 3.0];
        for _ in 0..250 {
            w.push(&phi);
        }
        assert_eq!(w.mean(), phi.to_vec());
    }

    #[test]
    fn keeps_only_trailing_entries() {
        let mut w = FluxWindow::<f64>::new(1, 3);
        for v in 1..=5 {
            w.push(&[v as f64]);
        }
        assert_eq!(w.len(), 3);
        assert!((w.mean()[0] - 4.0).abs() < 1e-15);
        assert_eq!(w.max_abs(), vec![5.0]);
    }

    #[test]
    fn partial_window_averages_what_it_has() {
        let mut w = FluxWindow::<f64>::new(2, 10);
        assert_eq!(w.mean(), vec![0.0, 0.0]);
        w.push(&[1.0, -2.0]);
        w.push(&[3.0, -4.0]);
        assert_eq!(w.mean(), vec![2.0, -3.0]);
    }
}
