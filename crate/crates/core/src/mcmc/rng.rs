use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seedable, splittable random stream.
///
/// A stream is addressed by `(master seed, run index, replica index)`. The
/// master seed keys a ChaCha8 generator and the other two coordinates pick
/// its stream number, so distinct addresses never share output.
#[derive(Debug, Clone)]
pub struct RngStream {
    master: u64,
    run: u64,
    replica: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn from_parts(master: u64, run: u64, replica: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master);
        inner.set_stream(splitmix64(splitmix64(run) ^ replica.rotate_left(32)));
        RngStream {
            master,
            run,
            replica,
            inner,
        }
    }

    pub fn new(master: u64) -> Self {
        Self::from_parts(master, 0, 0)
    }

    /// Stream for replica `replica` of the same run.
    pub fn replica(&self, replica: u64) -> Self {
        Self::from_parts(self.master, self.run, replica)
    }

    /// Stream for run `run` under the same master seed.
    pub fn run(&self, run: u64) -> Self {
        Self::from_parts(self.master, run, 0)
    }

    /// A child stream whose address depends on this stream's own output.
    /// Useful when a component needs a fresh stream mid-computation.
    pub fn fork(&mut self) -> Self {
        let master = self.inner.next_u64();
        Self::from_parts(master, self.run, self.replica)
    }

    pub fn address(&self) -> (u64, u64, u64) {
        (self.master, self.run, self.replica)
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
