//! Library side of the `nil2` binary: report plumbing, the three commands,
//! experiment runners, and the acceptance suites.

pub mod experiments;
pub mod report;
pub mod run;
pub mod suites;
