//! Fairness notions: color-mixing (CM) bounds, equitable distances (EQ), and
//! the socially fair (SF) objective.

mod check;
mod solve;
mod spec;

pub use check::{check_cm, check_eq, group_averages, sf_objective, BoundSide, CmViolation, EqViolation};
pub use solve::{
    enumerate_optima, group_degradation, pof_from_solutions, price_of_fairness, solve_fair, GroupDegradation,
    PofReport, SfRatio, PER_GROUP_DEFINITION,
};
pub use spec::{CmBounds, Constraint, EqSpec, Notion, SfSpec};
