fn main() -> std::process::ExitCode {
    humour_styles::cli::main()
}
