//! Step-by-step growth of a one-dimensional tree on six samples.

use idt::audit::enumerate_prunings;
use idt::{NodeLabel, TreeConfig, TreeRegressor};

fn labels(reg: &TreeRegressor) -> Vec<String> {
    let mut out: Vec<String> = reg.tree().nodes().iter().map(|n| n.label.to_string()).collect();
    out.sort();
    out
}

fn alpha(reg: &TreeRegressor, label: &str) -> u8 {
    let label: NodeLabel = label.parse().unwrap();
    reg.tree().node(reg.tree().find(&label).unwrap()).alpha
}

#[test]
fn six_sample_walkthrough() {
    let mut reg = TreeRegressor::incremental(TreeConfig::new(1, 1.0)).unwrap();
    let xs = [-0.3, -0.6, -0.2, 0.5, -0.8, 0.7];
    // (nodes after the step, active leaf, prunings)
    let expected: [(&[&str], &str, usize); 6] = [
        (&["λ"], "λ", 1),
        (&["0", "1", "λ"], "0", 2),
        (&["0", "00", "01", "1", "λ"], "01", 3),
        (&["0", "00", "01", "1", "λ"], "1", 3),
        (&["0", "00", "01", "1", "λ"], "00", 3),
        (&["0", "00", "01", "1", "10", "11", "λ"], "11", 5),
    ];
    for (t, (&x, (nodes, leaf, prunings))) in xs.iter().zip(expected).enumerate() {
        let tr = reg.step(&[x], 0.5 * x).unwrap();
        let mut want: Vec<String> = nodes.iter().map(|s| s.to_string()).collect();
        want.sort();
        assert_eq!(labels(&reg), want, "step {}", t + 1);
        assert_eq!(tr.leaf.to_string(), leaf, "step {}", t + 1);
        assert_eq!(reg.tree().light_count(), t + 1);
        assert_eq!(enumerate_prunings(reg.tree()).unwrap().len(), prunings);
    }

    // Siblings created without the sample stay unmarked until visited.
    assert_eq!(alpha(&reg, "10"), 0);
    assert_eq!(alpha(&reg, "11"), 1);
    assert_eq!(alpha(&reg, "00"), 1);

    // 0.5 sits on the boundary of "10" and "11" and belongs to the upper box.
    let tree = reg.tree();
    let n11 = tree.node(tree.find(&"11".parse().unwrap()).unwrap());
    assert_eq!((n11.region.lower[0], n11.region.upper[0]), (0.5, 1.0));
    assert_eq!(n11.rls.updates(), 2);
    let n10 = tree.node(tree.find(&"10".parse().unwrap()).unwrap());
    assert_eq!(n10.rls.updates(), 0);
    let n01 = tree.node(tree.find(&"01".parse().unwrap()).unwrap());
    assert_eq!((n01.region.lower[0], n01.region.upper[0]), (-0.5, 0.0));
}

#[test]
fn prunings_of_the_final_tree() {
    let mut reg = TreeRegressor::incremental(TreeConfig::new(1, 1.0)).unwrap();
    for x in [-0.3, -0.6, -0.2, 0.5, -0.8, 0.7] {
        reg.step(&[x], 0.0).unwrap();
    }
    let mut sets: Vec<String> = enumerate_prunings(reg.tree())
        .unwrap()
        .iter()
        .map(|m| m.leaves.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    sets.sort();
    assert_eq!(sets, ["0 1", "0 10 11", "00 01 1", "00 01 10 11", "λ"]);
}
