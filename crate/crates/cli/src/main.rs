fn main() {
    std::process::exit(lidar_al_cli::main_with_args(std::env::args_os()));
}
