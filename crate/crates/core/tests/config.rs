use distcg::config::{parse_pairs, RunConfig};
use distcg::AlgorithmKind;
use proptest::prelude::*;

fn label() -> impl Strategy<Value = String> {
    (prop::bool::ANY, 0usize..5).prop_map(|(inc, k)| {
        let strategy = if inc {
            distcg::Strategy::Incremental
        } else {
            distcg::Strategy::Diffusion
        };
        AlgorithmKind::ALL[k].label(strategy)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialized_config_parses_back_equal(
        single in label(),
        extra in prop::collection::vec(label(), 0..4),
        nodes in 1usize..40,
        taps in 1usize..20,
        instants in 1usize..5000,
        reps in 1usize..2000,
        noise in 0.0f64..1.0,
        input in 0.01f64..10.0,
        seed in any::<u64>(),
        lambda_f in 0.05f64..1.0,
        frac in 0.01f64..1.0,
        mu in 0.0f64..0.5,
        redraw in prop::bool::ANY,
        per_visit in prop::bool::ANY,
    ) {
        let low = (lambda_f - 0.5).max(0.0);
        let eta = low + (lambda_f - low) * frac;
        let mut text = format!(
            "nodes = {nodes}\ntaps = {taps}\ninstants = {instants}\nrepetitions = {reps}\n\
             noise-variance = {noise}\ninput-variance = {input}\nseed = {seed}\n\
             topology = {}\nforgetting = {}\n",
            if redraw { "redraw" } else { "fixed" },
            if per_visit { "per-visit" } else { "per-cycle" },
        );
        let mut labels = vec![single.clone()];
        for l in extra {
            if !labels.contains(&l) {
                labels.push(l);
            }
        }
        if labels.len() == 1 {
            let (s, k) = AlgorithmKind::parse_label(&single).unwrap();
            text.push_str(&format!("strategy = {s}\nalgorithm = {k}\n"));
            match k {
                AlgorithmKind::Ccg | AlgorithmKind::Mcg => {
                    text.push_str(&format!("lambda-f = {lambda_f}\neta = {eta}\n"))
                }
                AlgorithmKind::Lms | AlgorithmKind::Ap => text.push_str(&format!("mu = {mu}\n")),
                AlgorithmKind::Rls => text.push_str(&format!("lambda = {lambda_f}\n")),
            }
        } else {
            text.push_str(&format!("compare = {}\n", labels.join(",")));
            for l in &labels {
                let (_, k) = AlgorithmKind::parse_label(l).unwrap();
                if matches!(k, AlgorithmKind::Ccg | AlgorithmKind::Mcg) {
                    text.push_str(&format!("{l}.lambda-f = {lambda_f}\n{l}.eta = {eta}\n"));
                }
            }
        }
        let cfg = RunConfig::parse(&text).unwrap();
        let again = RunConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(again.to_text(), cfg.to_text());
    }
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let pairs =
        parse_pairs("# header\n\nstrategy = incremental # trailing\n  algorithm=lms\n").unwrap();
    assert_eq!(pairs.len(), 2);
    assert_eq!(pairs["algorithm"], "lms");
    assert!(parse_pairs("strategy incremental\n").is_err());
}

#[test]
fn topology_file_must_match_node_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, "3\n1 2\n2 3\n").unwrap();
    let base = format!(
        "strategy = diffusion\nalgorithm = lms\ntopology-file = {}\n",
        path.display()
    );
    assert!(RunConfig::parse(&format!("{base}nodes = 3\n")).is_ok());
    assert!(RunConfig::parse(&format!("{base}nodes = 4\n")).is_err());
    assert!(RunConfig::parse(&format!("{base}nodes = 3\ntopology = redraw\n")).is_err());
}

#[test]
fn missing_mode_is_reported() {
    for text in ["", "strategy = incremental\n", "algorithm = mcg\n"] {
        assert!(RunConfig::parse(text).is_err());
    }
}
