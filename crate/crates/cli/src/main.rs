use clap::Parser;

fn main() {
    let cli = torus_bnf_cli::Cli::parse();
    std::process::exit(torus_bnf_cli::run(cli));
}
