use idt::baselines::fixed_tree_regressor;
use idt::checkpoint::{read_checkpoint, write_checkpoint};
use idt::datagen::gen_uniform;
use idt::{DepthCap, Tree, TreeConfig, TreeRegressor};

#[test]
fn restricted_incremental_tree_matches_fixed_tree() {
    let stream = gen_uniform(3000, 2, 11).unwrap();
    let cfg = TreeConfig::new(2, 1.0);
    let realized = Tree::complete(cfg.clone().with_depth_cap(DepthCap::Fixed(2)), 2, 64).unwrap();
    let mut idt = TreeRegressor::resume(realized, 0);
    let mut ctw = fixed_tree_regressor(2, cfg).unwrap();
    assert!(idt.is_growing() && !ctw.is_growing());
    for (x, d) in &stream.pairs {
        assert_eq!(idt.step(x, *d).unwrap(), ctw.step(x, *d).unwrap());
    }
    assert_eq!(idt.tree().len(), 7);
}

#[test]
fn checkpoint_file_resume() {
    let stream = gen_uniform(600, 3, 2).unwrap();
    let cfg = TreeConfig::new(3, 1.0).with_depth_cap(DepthCap::CeilLog2);
    let mut full = TreeRegressor::incremental(cfg).unwrap();
    for (x, d) in &stream.pairs[..300] {
        full.step(x, *d).unwrap();
    }
    let file = tempfile::NamedTempFile::new().unwrap();
    write_checkpoint(full.tree(), full.steps(), std::fs::File::create(file.path()).unwrap()).unwrap();
    let reader = std::io::BufReader::new(std::fs::File::open(file.path()).unwrap());
    let (tree, steps) = read_checkpoint(reader).unwrap();
    let mut resumed = TreeRegressor::resume(tree, steps);
    for (x, d) in &stream.pairs[300..] {
        assert_eq!(full.step(x, *d).unwrap(), resumed.step(x, *d).unwrap());
    }
}
