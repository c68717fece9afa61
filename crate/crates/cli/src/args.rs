use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "lawvere", version, about = "Finite models, homomorphisms and term clones of algebraic theories")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=1024))]
    pub jobs: u32,
    /// Directory for cached model lists.
    #[arg(long, global = true, env = "LAWVERE_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Also print a human-readable summary on stderr.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Report cache hits and misses on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a theory, and optionally check that an algebra is a model.
    Check {
        file: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Enumerate models, one JSON record per line.
    Models {
        file: PathBuf,
        #[arg(long)]
        max_size: usize,
        /// Only models of size exactly `--max-size`.
        #[arg(long)]
        exact: bool,
        /// One model per isomorphism class.
        #[arg(long)]
        up_to_iso: bool,
    },
    /// Homomorphisms between two algebras, one JSON record per line.
    Homs {
        file: PathBuf,
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long)]
        isos_only: bool,
    },
    /// Automorphism group of an algebra.
    Auts {
        file: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Free algebra on N generators.
    Free {
        file: PathBuf,
        #[arg(long)]
        generators: usize,
        #[arg(long, default_value_t = 64)]
        max_elements: usize,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
    },
    /// Natural families U^N => U^M over models of size at most K.
    Clone {
        file: PathBuf,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        coarity: usize,
        #[arg(long)]
        max_size: usize,
        /// Term depth used to decide which families are term-induced.
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Compare term operations and natural families for every arity pair.
    Reconstruct {
        file: PathBuf,
        #[arg(long)]
        max_arity: usize,
        #[arg(long)]
        max_coarity: usize,
        #[arg(long)]
        max_size: usize,
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check candidate equations against every model of size at most K.
    Sieve {
        file: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        max_size: usize,
    },
    /// Decide whether two terms agree on every model of size at most K.
    Equiv {
        file: PathBuf,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        #[arg(long)]
        max_size: usize,
        /// Variable names in order, comma separated; inferred otherwise.
        #[arg(long, value_delimiter = ',')]
        vars: Option<Vec<String>>,
    },
    /// Restrict an algebra along a theory morphism.
    Restrict {
        #[arg(long)]
        morphism: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Size bound for validating the morphism first.
        #[arg(long, default_value_t = 3)]
        max_size: usize,
    },
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Skip reading families off a finite free algebra.
    #[arg(long)]
    pub no_shortcut: bool,
    #[arg(long, default_value_t = 2_000_000)]
    pub node_budget: u64,
    #[arg(long, default_value_t = 64)]
    pub max_elements: usize,
    #[arg(long, default_value_t = 8)]
    pub free_depth: usize,
}
