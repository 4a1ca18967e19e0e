use clap::Parser;

fn main() {
    let cli = hecke_spectra::cli::Cli::parse();
    std::process::exit(hecke_spectra::cli::main_with(cli));
}
