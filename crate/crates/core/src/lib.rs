//! Exact solvers for the robust fault-tolerant regenerator location problem.
//!
//! A signal travelling through a weighted network degrades after `d_max`
//! distance units and must be restored by a regenerator placed at an
//! intermediate node. Regenerator costs per node are uncertain (a discrete
//! set of cost scenarios) and up to `gamma` edges may fail at once. The
//! problem: pick a node set of minimum worst-case cost so that every pair of
//! nodes can still communicate under any admissible failure.
//!
//! Pipeline: [`graph`] builds the communication graph and the node sets the
//! formulations need, [`instance`] bundles and generates problems, [`fb`] and
//! [`cb`] build the two integer programs solved by [`milp`], [`iterative`]
//! alternates a light master problem with a flow subproblem for larger
//! inputs, [`oracle`] provides ground truth at small scale, and [`bench`]
//! drives timed experiments and performance profiles.

pub mod bench;
pub mod cb;
pub mod fb;
pub mod graph;
pub mod instance;
pub mod iterative;
pub mod milp;
pub mod oracle;
