//! Fixtures shared by the benchmarks.

use qflab::counting::{CountJob, Strategy};
use qflab::quadform::s0_diag;
use qflab::{OddPrime, SymMat};

/// Counting job for `<1,1,-1,1,-1>` against `diag(1,3)` at p = 3.
pub fn binary_job(t: u32, strategy: Strategy) -> CountJob {
    let p = OddPrime::new(3).expect("3 is an odd prime");
    CountJob::new(s0_diag(), SymMat::diag_i64(&[1, 3]), p, t, strategy).expect("valid job")
}
