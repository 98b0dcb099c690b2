macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(tensor_algebra, "tensor_algebra.rs");
example!(subspace, "subspace.rs");
example!(classic_denoise, "classic_denoise.rs");
example!(net_forward, "net_forward.rs");
example!(train_tiny, "train_tiny.rs");
example!(quality_metrics, "quality_metrics.rs");
example!(model_io, "model_io.rs");

#[test]
fn tensor_algebra_runs() {
    tensor_algebra::run_example().unwrap();
}

#[test]
fn subspace_runs() {
    subspace::run_example().unwrap();
}

#[test]
fn classic_denoise_runs() {
    classic_denoise::run_example().unwrap();
}

#[test]
fn net_forward_runs() {
    net_forward::run_example().unwrap();
}

#[test]
fn train_tiny_runs() {
    train_tiny::run_example().unwrap();
}

#[test]
fn quality_metrics_runs() {
    quality_metrics::run_example().unwrap();
}

#[test]
fn model_io_runs() {
    model_io::run_example().unwrap();
}
