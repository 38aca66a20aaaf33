mod common;

use common::{close, corpus, report, CORPUS};

fn totals(engine: &str, name: &str) -> Vec<f64> {
    let path = corpus(name);
    let bounds = report(&["verify", &path, "--engine", engine])["bounds"].clone();
    let best = report(&["solve", &path, "--engine", engine])["total_eu"]
        .as_f64()
        .unwrap();
    vec![
        bounds["min"].as_f64().unwrap(),
        bounds["max"].as_f64().unwrap(),
        best,
    ]
}

#[test]
fn oracle_and_circuit_agree_on_corpus() {
    for name in CORPUS.iter().filter(|n| **n != "archives_learn") {
        let oracle = totals("oracle", name);
        let circuit = totals("circuit", name);
        for (o, c) in oracle.iter().zip(&circuit) {
            assert!(
                close(*o, *c, 1e-9),
                "{name}: oracle {oracle:?} circuit {circuit:?}"
            );
        }
    }
}

#[test]
fn oracle_and_circuit_agree_on_queries() {
    let cases: [(&str, &str, &[&str]); 3] = [
        ("archives", "impact(bob,stamps)", &[]),
        (
            "burning_room",
            "saved_long",
            &["--strategy", "ask", "--evidence", "rvip=false"],
        ),
        ("cake_likes", "likes_cake(bob)", &[]),
    ];
    for (name, atom, extra) in cases {
        let path = corpus(name);
        let base = ["query", path.as_str(), "--atom", atom];
        let get = |engine: &str| {
            let args = [&base[..], extra, &["--engine", engine]].concat();
            report(&args)["probability"].as_f64().unwrap()
        };
        assert!(close(get("oracle"), get("circuit"), 1e-9), "{name} {atom}");
    }
}
