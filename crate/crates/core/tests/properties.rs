mod common;

fn pass(check: common::Check) {
    if let Err(e) = check {
        panic!("{e}");
    }
}

#[test]
fn generated_rows_hold_on_sampled_distributions() {
    pass(common::cone_soundness(100, 11));
}

#[test]
fn fourier_motzkin_agrees_with_double_description() {
    pass(common::fm_matches_dd(60, 12));
}

#[test]
fn facets_of_the_generators_give_back_the_cone() {
    pass(common::dd_roundtrip(60, 13));
}

#[test]
fn certificates_replay() {
    pass(common::certificate_replay(40, 14));
}

#[test]
fn sampled_triangle_networks_obey_monogamy() {
    pass(common::monogamy_sampling(200, 15));
}

#[test]
fn cutting_sources_keeps_pairwise_marginals() {
    pass(common::cut_preserves_marginals(100, 16));
}
