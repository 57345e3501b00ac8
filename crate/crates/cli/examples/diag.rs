use spatialnli_cli::{pipeline, resources, training};
use training::{comprehension_data, train_comprehension, type_frequency};

fn main() {
    let res = resources::load_resources(std::path::Path::new("data"), &["geo", "rest"], |_| {}).unwrap();
    let ds = res.datasets.get("geo").unwrap();
    let mut cfg = spatialnli_neural::comprehension::ComprehensionConfig::default();
    cfg.epochs = 26;
    let (model, store) = train_comprehension(&res, ds, cfg, |_| {});
    let test: Vec<_> = ds.test().collect();
    let (_, questions) = comprehension_data(&res, ds, &test);
    let freq = type_frequency(ds);
    println!("ambiguous test questions: {}", questions.len());
    for q in &questions {
        for (start, end, types, gold) in &q.values {
            let got = model.resolve_type(&store, &q.tokens, *start, *end, types, &freq);
            if got != *gold {
                let probs: Vec<String> = types.iter().map(|t| {
                    format!("{t}={:.2}", model.predict_span(&store, &q.tokens, *start, *end, t))
                }).collect();
                println!("MISS {} | gold {gold} got {got} | {}", q.tokens.join(" "), probs.join(" "));
            }
        }
    }
    let _ = pipeline::PipelineOptions::default();
}
