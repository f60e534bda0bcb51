use std::path::Path;

use rfterm::atomic::SpeciesData;
use rfterm::Half;

const HARTREE_CM: f64 = 219_474.631_363_2;

struct Level {
    n: u32,
    l: u32,
    j: Half,
    defect: f64,
    binding_cm: f64,
}

fn fixture() -> Vec<Level> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cs_levels.csv");
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("n,"))
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            Level {
                n: f[0].parse().unwrap(),
                l: f[1].parse().unwrap(),
                j: Half::from_f64(f[2].parse().unwrap()).unwrap(),
                defect: f[3].parse().unwrap(),
                binding_cm: f[4].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn bundled_cs_matches_level_fixture() {
    let cs = SpeciesData::bundled("cs133").unwrap();
    let levels = fixture();
    assert!(levels.len() >= 30);
    for lv in &levels {
        let n_star = cs.effective_principal(lv.n, lv.l, lv.j).unwrap();
        assert!((lv.n as f64 - n_star - lv.defect).abs() < 1e-9, "{} {} {}", lv.n, lv.l, lv.j);
        let binding = -cs.level_energy(lv.n, lv.l, lv.j).unwrap() * HARTREE_CM;
        assert!((binding / lv.binding_cm - 1.0).abs() < 1e-4, "{} {} {}: {binding} vs {}", lv.n, lv.l, lv.j, lv.binding_cm);
    }
    let d = levels.iter().find(|l| (l.n, l.l, l.j) == (45, 2, Half(5))).unwrap();
    assert!((d.defect - 2.466).abs() < 1e-3);
}

#[test]
fn cs_47s_sits_between_hydrogenic_manifolds() {
    let cs = SpeciesData::bundled("cs133").unwrap();
    let e = cs.level_energy(47, 0, Half(1)).unwrap();
    let n_star = cs.effective_principal(47, 0, Half(1)).unwrap();
    let below = cs.level_energy(n_star.floor() as u32, 5, Half(11)).unwrap();
    let above = cs.level_energy(n_star.ceil() as u32, 5, Half(11)).unwrap();
    assert!(below < e && e < above, "{below} < {e} < {above}");
}
