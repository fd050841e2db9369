use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "hodge", version, about = "Exact Hodge potentials, Hodge integrals and the Hodge hierarchy of a point")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Cache directory [default: $XDG_CACHE_HOME/hodge or ~/.cache/hodge].
    #[arg(long, global = true, env = "HODGE_CACHE_DIR", value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, env = "HODGE_SEED", default_value_t = 0x5eed_2024)]
    pub seed: u64,
    /// Report cache activity and timings on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bernoulli number B_n.
    Bernoulli {
        n: u32,
    },
    /// Free energy F_g as a differential polynomial in v.
    FreeEnergy {
        #[arg(long)]
        genus: u32,
        /// Fit again against intersection numbers instead of using the cache.
        #[arg(long)]
        refit: bool,
    },
    /// Hodge potential H_g.
    HodgePotential {
        #[arg(long)]
        genus: u32,
        /// Also run one more stage and require it to change nothing.
        #[arg(long)]
        verify_extra_stage: bool,
        /// Print the intermediate stage H_{g,h} instead.
        #[arg(long)]
        stage: Option<u32>,
    },
    /// Generating functions H_g(lambda; t); the whole table without --lambda.
    HodgeGf {
        #[arg(long)]
        genus: u32,
        /// Lambda indices, repeats allowed: 1,1,1 is lambda_1^3.
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Hodge integral of a lambda monomial against psi classes.
    HodgeNumber {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        lambda: String,
        /// Psi exponents, one per marked point.
        #[arg(long, value_delimiter = ',')]
        psi: Vec<u32>,
    },
    /// Flows, densities and the quasi-Miura map of the Hodge hierarchy.
    Hierarchy {
        #[command(flatten)]
        order: Order,
        /// Flow index q of dw/dt_q.
        #[arg(long)]
        flow: Option<u32>,
        /// Density index q of H_q (q >= -1).
        #[arg(long, allow_hyphen_values = true)]
        density: Option<i32>,
        /// Print the quasi-Miura correction.
        #[arg(long)]
        miura: bool,
        /// Verify Hamiltonian form, tau symmetry and commutativity for flows up to this index.
        #[arg(long, value_name = "MAXQ")]
        check: Option<u32>,
    },
    /// Deformed Hamiltonian operator.
    HamOperator {
        #[command(flatten)]
        order: Order,
    },
    /// ILW, Volterra or cubic specialization of the hierarchy.
    Specialize {
        #[arg(value_enum)]
        kind: Specialization,
        #[command(flatten)]
        order: Order,
        /// Cubic samples p:q, comma separated.
        #[arg(long, value_delimiter = ',')]
        samples: Vec<String>,
        /// Run the identities for this specialization.
        #[arg(long)]
        check: bool,
    },
    /// Normal form of the hierarchy's operator and first density.
    NormalForm {
        #[command(flatten)]
        order: Order,
        #[arg(long)]
        check: bool,
    },
    /// Run checks against published values and structural identities.
    Verify {
        #[arg(long, value_parser = ["core", "published", "quick", "all"], default_value = "core")]
        suite: String,
        /// Run these criteria instead of a suite.
        #[arg(long, value_delimiter = ',')]
        criterion: Vec<u32>,
        /// Cases per randomized property.
        #[arg(long, default_value_t = 200)]
        cases: u32,
        /// Include the genus-5 numbers.
        #[arg(long)]
        genus5: bool,
    },
}

#[derive(Debug, Args, Clone, Copy)]
pub struct Order {
    /// Even epsilon order K.
    #[arg(long, default_value_t = 4)]
    pub order: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Specialization {
    Ilw,
    Volterra,
    Cubic,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_density_parses() {
        let cli = Cli::try_parse_from(["hodge", "hierarchy", "--density", "-1"]).unwrap();
        assert!(matches!(cli.command, Command::Hierarchy { density: Some(-1), .. }));
    }
}
