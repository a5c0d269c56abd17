//! Deterministic random-field corpora for probes and experiments.

use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::math::FloatShim;
use crate::geometry::SingularMesh;
use crate::operators::ScalarField;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Profiles cycled through when building a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldProfile {
    /// Uniform values in [-1, 1].
    MixedSign,
    /// A Gaussian bump with random center, width and sign.
    Bump,
    /// The indicator of a single random cell.
    Indicator,
}

pub fn random_field(mesh: &SingularMesh, rng: &mut ChaCha8Rng, profile: FieldProfile) -> ScalarField {
    match profile {
        FieldProfile::MixedSign => ScalarField::from_values(
            (0..mesh.n_cells()).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect(),
        ),
        FieldProfile::Bump => {
            let t_len = mesh.config().t_len;
            let circ = mesh.config().circumference;
            let center_t = (0.2 + 0.6 * rng.random::<f64>()) * t_len;
            let center_th = rng.random::<f64>() * circ;
            let width = (0.05 + 0.2 * rng.random::<f64>()) * t_len;
            let height = if rng.random::<f64>() < 0.5 { 1.0 } else { -1.0 };
            ScalarField::from_fn(mesh, |t, th| {
                let dt = t - center_t;
                // Periodic angular distance.
                let mut dth = (th - center_th).abs();
                if dth > 0.5 * circ {
                    dth = circ - dth;
                }
                height * (-(dt * dt + dth * dth) / (2.0 * width * width)).exp()
            })
        }
        FieldProfile::Indicator => {
            let cell = rng.random_range(0..mesh.n_cells());
            let mut u = ScalarField::zeros(mesh);
            u.values_mut()[cell] = 1.0;
            u
        }
    }
}

/// `count` fields cycling mixed-sign, bump and indicator profiles.
pub fn field_corpus(mesh: &SingularMesh, seed: u64, count: usize) -> Vec<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles =
        [FieldProfile::MixedSign, FieldProfile::Bump, FieldProfile::Indicator];
    (0..count).map(|i| random_field(mesh, &mut rng, profiles[i % profiles.len()])).collect()
}

/// Seeded pairs of mixed-sign fields.
pub fn field_pairs(mesh: &SingularMesh, seed: u64, count: usize) -> Vec<(ScalarField, ScalarField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                random_field(mesh, &mut rng, FieldProfile::MixedSign),
                random_field(mesh, &mut rng, FieldProfile::MixedSign),
            )
        })
        .collect()
}
