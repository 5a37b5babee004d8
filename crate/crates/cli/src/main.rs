fn main() {
    std::process::exit(wscluster_cli::app::main_with_args(std::env::args_os()));
}
