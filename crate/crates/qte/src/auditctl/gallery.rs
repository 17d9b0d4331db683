//! Attack gallery: fixed attacks plus seeded random isometries, used to
//! report best-attack-found lower bounds on a scheme's `δ`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attacks::{builtin_attack, cgm_distinguisher, AttackKind};
use crate::channels::Circuit;
use crate::error::{Error, Result};
use crate::qmath::random::substream;
use crate::schemes::{tamper_profile, AqecmScheme, TamperProfile};

/// Largest side register of a gallery random isometry.
pub const MAX_GALLERY_ADIM: usize = 4;

#[derive(Clone, Debug)]
pub struct GalleryAttack {
    pub name: String,
    pub attack: Circuit,
}

/// Every fixed attack that fits the ciphertext of `s`, the distinguisher
/// for messages `0, 1` if it fits under `cap`, and `random` seeded isometries with side
/// dimension in `2..=4`.
pub fn attack_gallery(s: &AqecmScheme, random: usize, seed: u64, cap: usize) -> Result<Vec<GalleryAttack>> {
    let cipher = s.cipher_shape();
    let mut out = Vec::new();
    let fixed = [AttackKind::Identity, AttackKind::Bitflip, AttackKind::FullMeasure { wires: None }, AttackKind::DoubleSplit];
    for kind in fixed {
        if let Ok(attack) = builtin_attack(&kind, cipher) {
            out.push(GalleryAttack { name: kind.name(), attack });
        }
    }
    if s.num_messages() >= 2 {
        // skipped when its dense form does not fit the cap
        match cgm_distinguisher(s, 0, 1, cap) {
            Ok(d) => out.push(GalleryAttack { name: "cgm(m0=0, m1=1)".into(), attack: d.attack }),
            Err(Error::DimensionCap { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    for i in 0..random {
        let mut rng = substream(seed, i as u64);
        let kind = AttackKind::RandomIsometry { seed: rng.random(), adim: rng.random_range(2..=MAX_GALLERY_ADIM) };
        out.push(GalleryAttack { name: kind.name(), attack: builtin_attack(&kind, cipher)? });
    }
    Ok(out)
}

/// Profile of one gallery attack on a message pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GalleryResult {
    pub attack: String,
    pub delta_lb: f64,
    pub expectation: f64,
    pub max_distance: f64,
}

/// Best-attack-found summary; `delta_lb` is a lower bound on the scheme's
/// `δ`, never the `δ` itself.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GallerySummary {
    pub results: Vec<GalleryResult>,
    pub best_attack: String,
    pub delta_lb: f64,
    /// Attacks whose evaluation did not fit under the cap.
    pub skipped: Vec<String>,
}

pub fn evaluate_gallery(
    s: &AqecmScheme,
    gallery: &[GalleryAttack],
    m: usize,
    m2: usize,
    cap: usize,
) -> Result<GallerySummary> {
    let mut results = Vec::with_capacity(gallery.len());
    let mut skipped = Vec::new();
    for g in gallery {
        let p: TamperProfile = match tamper_profile(s, &g.attack, m, m2, cap) {
            Ok(p) => p,
            Err(Error::DimensionCap { .. }) => {
                skipped.push(g.name.clone());
                continue;
            }
            Err(e) => return Err(e),
        };
        results.push(GalleryResult {
            attack: g.name.clone(),
            delta_lb: p.delta_lb(),
            expectation: p.expectation(),
            max_distance: p.max_distance(),
        });
    }
    let best = results.iter().max_by(|a, b| a.delta_lb.total_cmp(&b.delta_lb));
    let (best_attack, delta_lb) = best.map_or((String::new(), 0.0), |r| (r.attack.clone(), r.delta_lb));
    Ok(GallerySummary { results, best_attack, delta_lb, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{id_accept, triv_reject};

    #[test]
    fn gallery_is_seeded_and_bounded() {
        let s = id_accept(2).unwrap();
        let a = attack_gallery(&s, 3, 9, 256).unwrap();
        let b = attack_gallery(&s, 3, 9, 256).unwrap();
        let names: Vec<_> = a.iter().map(|g| g.name.clone()).collect();
        assert_eq!(names, b.iter().map(|g| g.name.clone()).collect::<Vec<_>>());
        assert!(!names.iter().any(|n| n == "double_split"));
        for g in &a {
            assert!(g.attack.out_shape().total_dim() <= s.cipher_shape().total_dim() * 4);
        }
    }

    #[test]
    fn identity_leaks_everything_on_id_accept() {
        let s = id_accept(2).unwrap();
        let g = attack_gallery(&s, 0, 1, 256).unwrap();
        let sum = evaluate_gallery(&s, &g, 0, 1, 256).unwrap();
        assert!((sum.delta_lb - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triv_reject_gallery_is_silent() {
        let s = triv_reject(2).unwrap();
        let g = attack_gallery(&s, 2, 1, 256).unwrap();
        let sum = evaluate_gallery(&s, &g, 0, 1, 256).unwrap();
        assert!(sum.results.iter().all(|r| r.max_distance == 0.0));
    }
}
