//! Utility model, welfare aggregates, the welfare-centric objective, and
//! side-by-side comparison of notions by realized welfare.

mod compare;
mod model;
mod wc;

pub use compare::{compare_notions, CompareNotion, CompareOptions, Comparison, ComparisonRow};
pub use model::{
    diversity, point_utility, theorem1_model, welfare, DistanceTerm, OutcomeTerm, PointModel, UtilityModel,
    WelfareReport,
};
pub use wc::solve_welfare_centric;
