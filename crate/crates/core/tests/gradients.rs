mod common;

use common::gradcheck::*;
use common::*;
use normembed::SpaceSpec;
use proptest::prelude::*;
use rand::Rng;

fn check(err: Option<f64>, spec: &SpaceSpec) -> Result<(), TestCaseError> {
    let Some(e) = err else {
        return Err(TestCaseError::reject("near a kink"));
    };
    prop_assert!(e <= TOL, "{spec}: {e:e}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn factor_distance_gradients(seed in any::<u64>(), kind in 0usize..4, dim in 1usize..=6) {
        let mut r = rng(seed);
        let spec = SpaceSpec::single(factor_of_kind(kind, dim, r.gen_range(0.25..4.0))).unwrap();
        check(distance_case(&mut r, &spec), &spec)?;
    }

    #[test]
    fn product_distance_gradients(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r);
        check(distance_case(&mut r, &spec), &spec)?;
    }

    #[test]
    fn reconstruction_loss_gradient(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r);
        check(reconstruction_case(&mut r, &spec, n), &spec)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn hinge_loss_gradient(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r);
        check(hinge_case(&mut r, &spec), &spec)?;
    }

    #[test]
    fn bce_recsys_gradient(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r);
        check(bce_case(&mut r, &spec), &spec)?;
    }

    #[test]
    fn linkpred_gradient(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r);
        check(linkpred_case(&mut r, &spec), &spec)?;
    }
}
