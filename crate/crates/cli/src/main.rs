fn main() {
    std::process::exit(contact_grasp::cli::run_command(std::env::args_os()));
}
