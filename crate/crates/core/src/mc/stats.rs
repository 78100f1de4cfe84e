//! Chunked, order-stable accumulation of per-trial statistics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trials per substream. Fixed so that results do not depend on the number
/// of worker threads.
pub const CHUNK_TRIALS: u64 = 1024;

/// Kahan-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(-other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum - self.comp
    }
}

/// Power sums of `x − shift` up to the fourth order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    shift: f64,
    count: u64,
    sums: [KahanSum; 4],
}

impl Moments {
    /// Centering near the expected mean keeps the raw sums well conditioned.
    pub fn new(shift: f64) -> Self {
        Moments {
            shift,
            count: 0,
            sums: [KahanSum::default(); 4],
        }
    }

    pub fn push(&mut self, x: f64) {
        let d = x - self.shift;
        let mut p = d;
        for s in &mut self.sums {
            s.add(p);
            p *= d;
        }
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Moments) {
        debug_assert_eq!(self.shift, other.shift);
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a.merge(b);
        }
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.shift + self.raw(0)
    }

    fn raw(&self, k: usize) -> f64 {
        self.sums[k].value() / self.count as f64
    }

    fn central2(&self) -> f64 {
        let m = self.raw(0);
        (self.raw(1) - m * m).max(0.0)
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        self.central2() * n / (n - 1.0)
    }

    fn central4(&self) -> f64 {
        let m = self.raw(0);
        let (r2, r3, r4) = (self.raw(1), self.raw(2), self.raw(3));
        (r4 - 4.0 * m * r3 + 6.0 * m * m * r2 - 3.0 * m.powi(4)).max(0.0)
    }

    pub fn mean_std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Large-sample standard error of [`Moments::variance`].
    pub fn variance_std_error(&self) -> f64 {
        let v = self.central2();
        ((self.central4() - v * v).max(0.0) / self.count as f64).sqrt()
    }
}

/// Substream generator for chunk `chunk` under master seed `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `trials` trials split into fixed chunks, in parallel, and returns the
/// per-chunk accumulators in chunk order.
///
/// `init` builds a fresh accumulator; `trial` runs one trial.
pub fn run_chunks<A, I, F>(trials: u64, seed: u64, init: I, trial: F) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut ChaCha8Rng, &mut A) + Sync,
{
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut acc = init();
            let count = CHUNK_TRIALS.min(trials - c * CHUNK_TRIALS);
            for _ in 0..count {
                trial(&mut rng, &mut acc);
            }
            acc
        })
        .collect()
}

/// [`run_chunks`] for a scalar statistic, merged in chunk order.
pub fn run_moments<F>(trials: u64, seed: u64, shift: f64, stat: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let parts = run_chunks(trials, seed, || Moments::new(shift), |rng, m| m.push(stat(rng)));
    let mut total = Moments::new(shift);
    for p in &parts {
        total.merge(p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::default();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn moments_of_known_sample() {
        let mut m = Moments::new(2.0);
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.count(), 4);
        assert!((m.mean() - 2.5).abs() < 1e-15);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
        // Population μ₄ = (1.5⁴·2 + 0.5⁴·2)/4 = 2.5625, σ² = 1.25.
        let want = ((2.5625f64 - 1.25 * 1.25) / 4.0).sqrt();
        assert!((m.variance_std_error() - want).abs() < 1e-15);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut all = Moments::new(0.1);
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::new(0.1), Moments::new(0.1));
        xs[..37].iter().for_each(|&x| a.push(x));
        xs[37..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean() - all.mean()).abs() < 1e-15);
        assert!((a.variance() - all.variance()).abs() < 1e-15);
    }

    #[test]
    fn independent_of_thread_count() {
        let stat = |rng: &mut ChaCha8Rng| rng.random::<f64>();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_moments(5000, 9, 0.5, stat))
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one.count(), 5000);
    }

    #[test]
    fn chunks_use_distinct_streams() {
        let a: u64 = chunk_rng(1, 0).random();
        let b: u64 = chunk_rng(1, 1).random();
        assert_ne!(a, b);
    }
}
