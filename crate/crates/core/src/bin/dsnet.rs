fn main() -> std::process::ExitCode {
    dsnet::cli::main()
}
