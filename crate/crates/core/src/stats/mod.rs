//! Nonparametric k-sample tests, their tail probabilities, and the cue
//! confusion matrix.

pub mod confusion;
pub mod hypothesis;
pub mod special;

pub use confusion::{ConfusionMatrix, CueTrial, TABLE_ORDER};
pub use hypothesis::{kruskal_wallis, levene, mid_ranks, Dof, LeveneCenter, RankTestResult};
pub use special::{beta_inc, chi2_sf, f_sf, gamma_p, gamma_q, ln_gamma};
