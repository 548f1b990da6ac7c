//! Canonical two-valued social choice rules.
//!
//! A rule choosing between two alternatives `a` and `b` is described by a
//! *character* (a map from profiles into a finite poset) together with an
//! upward-closed set of character values: the rule picks `a` exactly when the
//! profile's character lands in that set. Different characters capture
//! different rule classes (all non-manipulable rules, anonymous ones, rules on
//! strict or two-alternative domains, strongly group strategy-proof ones).
//!
//! The [`oracle`] module checks every such statement against brute-force
//! manipulation searches on small domains.

pub mod characters;
pub mod cli;
pub mod guard;
pub mod io;
pub mod oracle;
pub mod order;
pub mod prefs;
pub mod rules;
