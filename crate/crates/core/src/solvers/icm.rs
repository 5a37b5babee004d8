use rand::Rng;

use crate::instance::ProblemInstance;
use crate::mcmc::SpinState;

/// Reusable buffers for overlap-cluster construction.
#[derive(Debug, Clone, Default)]
pub struct IcmScratch {
    in_cluster: Vec<bool>,
    cluster: Vec<usize>,
    stack: Vec<usize>,
    disagree: Vec<usize>,
}

impl IcmScratch {
    pub fn new(n: usize) -> Self {
        IcmScratch {
            in_cluster: vec![false; n],
            cluster: Vec::with_capacity(n),
            stack: Vec::with_capacity(n),
            disagree: Vec::with_capacity(n),
        }
    }

    pub(crate) fn cluster(&self) -> &[usize] {
        &self.cluster
    }

    pub(crate) fn membership(&self) -> &[bool] {
        &self.in_cluster
    }

    pub(crate) fn clear(&mut self) {
        for &i in &self.cluster {
            self.in_cluster[i] = false;
        }
        self.cluster.clear();
    }

    /// Grows the connected component of sites where `a` and `b` disagree,
    /// seeded at a uniformly random disagreeing site. Returns `false` when
    /// the two states are identical.
    pub(crate) fn grow_overlap_cluster<R: Rng + ?Sized>(
        &mut self,
        instance: &ProblemInstance,
        a: &[i8],
        b: &[i8],
        rng: &mut R,
    ) -> bool {
        if self.in_cluster.len() != a.len() {
            *self = IcmScratch::new(a.len());
        }
        self.clear();
        self.disagree.clear();
        self.disagree
            .extend(a.iter().zip(b).enumerate().filter(|(_, (x, y))| x != y).map(|(i, _)| i));
        if self.disagree.is_empty() {
            return false;
        }
        let seed = self.disagree[rng.random_range(0..self.disagree.len())];
        self.in_cluster[seed] = true;
        self.stack.push(seed);
        let adjacency = instance.adjacency();
        while let Some(i) = self.stack.pop() {
            self.cluster.push(i);
            let (nb, _) = adjacency.row(i);
            for &j in nb {
                let j = j as usize;
                if !self.in_cluster[j] && a[j] != b[j] {
                    self.in_cluster[j] = true;
                    self.stack.push(j);
                }
            }
        }
        true
    }
}

/// Houdayer cluster move between two replicas at the same temperature.
///
/// Picks a random site where the replicas disagree, builds its connected
/// cluster of disagreeing sites and flips it in both replicas. The move
/// exchanges the replicas' spins on the cluster, so `E_a + E_b` is
/// unchanged exactly. Returns the cluster size, or `None` when the replicas
/// are identical.
pub fn houdayer_icm_move<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    a: &mut SpinState,
    b: &mut SpinState,
    scratch: &mut IcmScratch,
    rng: &mut R,
) -> Option<usize> {
    if !scratch.grow_overlap_cluster(instance, a.spins(), b.spins(), rng) {
        return None;
    }
    let da = instance.cluster_delta(a.spins(), scratch.cluster(), scratch.membership());
    let db = instance.cluster_delta(b.spins(), scratch.cluster(), scratch.membership());
    debug_assert_eq!(da + db, 0, "isoenergetic move changed the total energy");
    a.apply_cluster(scratch.cluster(), da);
    b.apply_cluster(scratch.cluster(), db);
    Some(scratch.cluster().len())
}
