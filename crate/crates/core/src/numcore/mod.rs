//! Dense matrices and the reverse-mode gradient engine.

mod check;
mod matrix;
mod tape;

pub use check::{finite_diff_check, finite_diff_check_with_step, FD_STEP};
pub use matrix::Matrix;
pub use tape::{sigmoid, Elementwise, Gradients, Node, Op, Tape, Var};
