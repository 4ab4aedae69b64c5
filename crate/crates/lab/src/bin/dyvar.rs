fn main() {
    std::process::exit(dyvar_lab::run_cli(std::env::args_os()));
}
