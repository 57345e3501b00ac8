use spatialnli_cli::{resources, training};
use training::*;

fn main() {
    let res = resources::load_resources(std::path::Path::new("data"), &["geo", "rest"], |_| {}).unwrap();
    let ds = res.datasets.get("rest").unwrap();
    let variant = Variant::default();
    let pairs = translator_pairs(&res, ds, variant, &AugmentConfig::default());
    println!("pairs: {}", pairs.len());
    let mut cfg = spatialnli_neural::translator::TranslatorConfig::default();
    cfg.epochs = 28; cfg.seed = 21;
    let t0 = std::time::Instant::now();
    let (tr, tr_store) = train_translator(&pairs, cfg, variant, &res, None, |m| {
        if m.contains("epoch 0:") || m.contains("epoch 9:") || m.contains("epoch 27:") { println!("{m}"); }
    });
    println!("train time {:.0?}", t0.elapsed());
    let mut ccfg = spatialnli_neural::comprehension::ComprehensionConfig::default();
    ccfg.epochs = 16;
    let (comp, comp_store) = train_comprehension(&res, ds, ccfg, |_| {});
    let entries: Vec<_> = ds.test().collect();
    let models = EvalModels { translator: &tr, tr_store: &tr_store, comprehension: Some((&comp, &comp_store)), random_seed: 7 };
    let rep = evaluate_corpus(&res, ds, &models, variant, &entries, ScoreMode::Denotation);
    println!("rest full: {}/{} = {:.1}%  confusion {:?}", rep.correct, rep.total, 100.0*rep.accuracy, rep.confusion);
    for row in rep.rows.iter().filter(|r| !r.ok).take(6) {
        println!("MISS [{}] {} => {}", row.stage.unwrap_or("?"), row.question, row.predicted);
    }
    println!("total {:.0?}", t0.elapsed());
}
