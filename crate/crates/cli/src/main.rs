fn main() {
    std::process::exit(helm_sim::main_with_args(std::env::args_os()));
}
