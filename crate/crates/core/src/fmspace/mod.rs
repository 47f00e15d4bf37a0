//! Metric spaces, the standard fuzzy metric `M(x,y,t) = t/(t + d(x,y))`,
//! its transform by a bijection, uniformity predicates and axiom checks.

mod axioms;
mod metric;
mod point;
mod space;

pub use axioms::{verify_fm_axioms, CandidateMetric, FM5_SLACK, FM6_TOLERANCE};
pub use metric::{standard_membership, threshold_for_distance, FuzzyMetric, DEFAULT_THRESHOLD_TOL};
pub use point::{render_f64, Point};
pub use space::{Space, SpaceKind, TRIANGLE_SLACK, UNBOUNDED_SAMPLE_BOX};
