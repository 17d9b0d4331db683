//! Counterexample attacks, reduction attacks and attack translations.

pub mod builtin;
pub mod reductions;

pub use builtin::{builtin_attack, AttackKind};
pub use reductions::{
    cgm_distinguisher, game_from_rev, game_value, lift_hybrid_attack, qm_counterfeit_adapter, rev_from_game,
    rev_from_tamper, tamper_from_rev, Distinguisher, GameAttack, GameCheck, GamePair, PairAttack,
};
