use std::io::Write;

fn main() {
    let env_order = std::env::var("ORDER").ok();
    let outcome = toric_mirror_cli::run(std::env::args_os(), env_order.as_deref());
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.code);
}
