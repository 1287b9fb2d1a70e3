use techlev::ingest::{annotate_vulnerabilities, load_corpus_with, load_vuln_db, LoadOptions, RemoteRepository};

use crate::config::ToolConfig;
use crate::error::{CliError, Result};
use crate::io::{csv_bytes, instances_csv, write_atomic};

pub const INSTANCES: &str = "instances.csv";
pub const EXCLUSIONS: &str = "exclusions.csv";

pub fn run(config: &ToolConfig) -> Result<()> {
    let manifest = config.require_inputs()?;
    let options = LoadOptions {
        profile: config.language_profile.clone(),
        min_own_loc: config.loc_filter_min,
        dep_mode: config.dep_mode,
        remote: config
            .remote_repo_url
            .as_ref()
            .map(|url| RemoteRepository::new(url.clone(), config.cache_dir.clone())),
    };
    let mut corpus = load_corpus_with(manifest, &options).map_err(|e| CliError::Data(e.to_string()))?;
    if let Some(db_path) = &config.vuln_db_path {
        let db = load_vuln_db(db_path).map_err(|e| CliError::Data(e.to_string()))?;
        annotate_vulnerabilities(&mut corpus.instances, &db);
    }
    log::info!("{} instances kept, {} excluded", corpus.instances.len(), corpus.exclusions.len());

    let out = &config.output_dir;
    write_atomic(&out.join(INSTANCES), &instances_csv(&corpus.instances))?;
    let exclusions = corpus
        .exclusions
        .iter()
        .map(|e| vec![e.gav.to_string(), e.reason.code().to_string(), e.reason.detail()]);
    write_atomic(&out.join(EXCLUSIONS), &csv_bytes(&["gav", "reason", "detail"], exclusions))
}
