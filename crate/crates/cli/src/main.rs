use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cache = std::env::var_os(twmk::CACHE_ENV).map(PathBuf::from);
    let catalog = std::env::var_os(twmk::CATALOG_ENV).map(PathBuf::from);
    let out = twmk::run(std::env::args_os(), cache, catalog);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(out.code as u8)
}
