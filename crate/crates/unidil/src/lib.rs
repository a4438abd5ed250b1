//! Certified computation of dilation scales, operator norms, and metric
//! quantities for finite tuples of unitaries.
//!
//! The crate covers three interacting families: phase representations with a
//! fixed commutation angle (clock-and-shift matrices and their tensor
//! products), random-matrix models of free Haar unitaries, and Weyl
//! operators on a truncated boson Fock space. On top of these it provides
//! certified suprema over phase tori (grid and branch-and-bound with
//! explicit Lipschitz certificates), closed-form scale constants, an
//! explicit commuting-dilation constructor, level-set support functions, and
//! a Hölder-continuous path-extension utility.
//!
//! Every certified quantity travels as a [`dilation::CertifiedValue`]
//! carrying its error bound and bound direction; Monte-Carlo estimates are
//! clearly separated from certified ones.

pub mod dilation;
pub mod freemodel;
pub mod matcore;
pub mod mrange;
pub mod pathext;
pub mod rotreps;
pub mod weylfock;
