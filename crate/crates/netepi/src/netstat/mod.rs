//! Descriptive statistics of contact networks: components and distances,
//! local structure, communities, degree tails and planar layouts.

mod community;
mod layout;
mod structure;
mod tail;

pub use community::{
    adjusted_rand_index, chi2_homogeneity, cluster_modularity, coarsen, mixing, modularity, null_modularity,
    refine_hierarchically, rewire, ChiSquare, ClusterNode, Coarsened, MixingMatrix, NullSample, Partition,
};
pub use layout::{layout, Layout};
pub use structure::{
    components, geodesic_stats, local_structure, Components, GeodesicStats, LocalStructure, GIANT_RATIO,
};
pub use tail::{
    fit_power_law_kl, hill, hill_plateau, hill_scan, kl_scan, HillEstimate, HillPlateau, TailFit, ALPHA_CRITICAL,
    ALPHA_FINITE_MEAN,
};
