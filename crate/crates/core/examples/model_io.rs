// Image files with JSON sidecars, model files and optimizer state.
//
// ```bash
// cargo run --example model_io
// ```

use smds::io::{make_phantom, read_hsi, read_sidecar, write_hsi, write_sidecar, HsiSidecar, PhantomSpec};
use smds::net::{init_params, load_params, save_params, NetConfig};
use smds::train::{load_adam, save_adam, AdamState};

pub fn run_example() -> smds::Result<()> {
    let dir = std::env::temp_dir().join(format!("smds-model-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let x = make_phantom(&PhantomSpec::new([16, 16, 8], 3, 1))?;
    let img = dir.join("phantom.hsc");
    write_hsi(&img, &x)?;
    write_sidecar(&img, &HsiSidecar { wavelengths: Some((0..8).map(|b| 400.0 + 40.0 * b as f64).collect()), ..Default::default() })?;
    let back = read_hsi(&img)?;
    let err = back.sub(&x)?.max_abs();
    println!("image round trip: {} bytes, max error {:.1e} (f32 storage)", std::fs::metadata(&img)?.len(), err);
    println!("sidecar: {:?}", read_sidecar(&img)?.and_then(|m| m.wavelengths).map(|w| w.len()));

    let cfg = NetConfig::new([5, 5, 5], [6, 6, 5], 3)?;
    let params = init_params(&cfg)?;
    let model = dir.join("net.smds");
    save_params(&params, &cfg, &model)?;
    let (loaded, loaded_cfg) = load_params(&model)?;
    assert_eq!(loaded, params);
    println!("model: K={} cube {:?} atoms {:?}, {} bytes, bitwise equal", loaded_cfg.layers, loaded_cfg.cube, loaded_cfg.atoms, std::fs::metadata(&model)?.len());

    let adam = AdamState::for_params(&params);
    save_adam(&adam, dir.join("net.smds.adam"))?;
    assert_eq!(load_adam(dir.join("net.smds.adam"))?, adam);

    std::fs::write(&model, b"SMDSNET1 but nothing else")?;
    match load_params(&model) {
        Err(e) => println!("damaged model rejected: error[{}] {}", e.category(), e),
        Ok(_) => unreachable!(),
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {}", e);
        std::process::exit(1);
    }
}
