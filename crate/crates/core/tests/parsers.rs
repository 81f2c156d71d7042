//! Parser robustness: the checks of the fuzz targets, replayed over the
//! checked-in corpus and over random and mutated inputs.

use std::path::PathBuf;

use expu_core::harness::ExperimentConfig;
use expu_core::{Channel, Codebook, EvalMethod, GammaKind, InputDistribution, RateGrid};
use proptest::prelude::*;

fn check_channel(text: &str) {
    if let Ok(ch) = Channel::from_json_str(text) {
        for row in ch.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
        let bm = ch.bhattacharyya_matrix();
        for a in 0..ch.inputs() {
            for b in 0..ch.inputs() {
                assert!((0.0..=1.0).contains(&bm.get(a, b)));
            }
        }
        assert_eq!(Channel::from_json_str(&ch.to_json_string()).unwrap(), ch);
    }
}

fn check_config(text: &str) {
    if let Ok(cfg) = ExperimentConfig::from_json_str(text) {
        cfg.validate().unwrap();
        assert_eq!(
            ExperimentConfig::from_json_str(&cfg.to_json_string()).unwrap(),
            cfg
        );
    }
}

fn check_codebook(text: &str) {
    if let Ok(code) = serde_json::from_str::<Codebook>(text) {
        assert_eq!(code.len() as u64, code.spec().m_prime());
        let k = code.spec().alphabet_size();
        assert!(code
            .rows()
            .all(|r| r.len() == code.n() && r.iter().all(|&s| s < k)));
    }
}

fn check_flags(text: &str) {
    if let Ok(q) = text.parse::<InputDistribution>() {
        assert_eq!(q.to_string().parse::<InputDistribution>().unwrap(), q);
    }
    if let Ok(grid) = text.parse::<RateGrid>() {
        let points = grid.points();
        assert!(!points.is_empty());
        assert!(points.windows(2).all(|w| w[0] < w[1]));
    }
    if let Ok(kind) = text.parse::<GammaKind>() {
        assert_eq!(kind.to_string().parse::<GammaKind>().unwrap(), kind);
        assert!(kind.gamma(1) >= 1.0);
    }
    if let Ok(m) = text.parse::<EvalMethod>() {
        assert_eq!(m.to_string().parse::<EvalMethod>().unwrap(), m);
    }
}

fn corpus(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus {target}");
    files
        .iter()
        .map(|p| std::fs::read_to_string(p).unwrap())
        .collect()
}

#[test]
fn corpus_channel_json() {
    let seeds = corpus("channel_json");
    seeds.iter().for_each(|s| check_channel(s));
    assert!(seeds.iter().any(|s| Channel::from_json_str(s).is_ok()));
    assert!(seeds.iter().any(|s| Channel::from_json_str(s).is_err()));
}

#[test]
fn corpus_experiment_config() {
    let seeds = corpus("experiment_config");
    seeds.iter().for_each(|s| check_config(s));
    assert!(seeds
        .iter()
        .any(|s| ExperimentConfig::from_json_str(s).is_ok()));
}

#[test]
fn corpus_codebook_json() {
    let seeds = corpus("codebook_json");
    seeds.iter().for_each(|s| check_codebook(s));
    assert!(seeds
        .iter()
        .all(|s| serde_json::from_str::<Codebook>(s).is_ok()));
}

#[test]
fn corpus_text_flags() {
    corpus("text_flags").iter().for_each(|s| check_flags(s));
}

#[test]
fn tiny_steps_rejected() {
    assert!("1e300:1e300:1e-10".parse::<RateGrid>().is_err());
    assert!("0.4:0.5:1e-20".parse::<RateGrid>().is_err());
}

fn mutate(seed: &str, edits: &[(usize, u8)]) -> String {
    let mut bytes = seed.as_bytes().to_vec();
    for &(pos, b) in edits {
        if bytes.is_empty() {
            break;
        }
        let i = pos % bytes.len();
        match b % 3 {
            0 => bytes[i] = b" 0123456789.-e,:[]{}\""[b as usize % 21],
            1 => {
                bytes.remove(i);
            }
            _ => bytes.insert(i, b"0.9e-,:]"[b as usize % 8]),
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arbitrary_text_never_panics(s in ".{0,64}") {
        check_channel(&s);
        check_config(&s);
        check_codebook(&s);
        check_flags(&s);
    }

    #[test]
    fn flag_shaped_text(s in "[0-9.e:,-]{0,24}|(poly|const|sqrt-exp):?[0-9.e-]{0,8}") {
        check_flags(&s);
    }

    #[test]
    fn mutated_seeds(edits in prop::collection::vec((any::<usize>(), any::<u8>()), 1..6)) {
        for s in corpus("channel_json") {
            check_channel(&mutate(&s, &edits));
        }
        for s in corpus("experiment_config") {
            check_config(&mutate(&s, &edits));
        }
        for s in corpus("codebook_json") {
            check_codebook(&mutate(&s, &edits));
        }
        for s in corpus("text_flags") {
            check_flags(&mutate(&s, &edits));
        }
    }
}
