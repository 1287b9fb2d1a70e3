//! Download of descriptors and source archives from a Maven-layout
//! repository into a local cache that mirrors the repository paths.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use thiserror::Error;

use crate::loc::{count_text_loc, LanguageProfile};
use crate::model::VersionedCoordinate;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("artifact not found: {url}")]
    Missing { url: String },
    /// Transport failures and non-404 HTTP errors; worth retrying.
    #[error("retryable failure fetching {url}: {message}")]
    Retryable { url: String, message: String },
    #[error("cache I/O on {path}: {source}")]
    Cache {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot read source archive {path}: {message}")]
    Archive { path: PathBuf, message: String },
}

/// Repository-relative paths of the descriptor (`.pom`) and the sources
/// archive, e.g. `org/slf4j/slf4j-api/1.7.25/slf4j-api-1.7.25-sources.jar`.
pub fn repository_path(gav: &VersionedCoordinate) -> (String, String) {
    let dir = format!(
        "{}/{}/{}",
        gav.group().replace('.', "/"),
        gav.artifact(),
        gav.version
    );
    let stem = format!("{}-{}", gav.artifact(), gav.version);
    (format!("{dir}/{stem}.pom"), format!("{dir}/{stem}-sources.jar"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchedArtifact {
    pub descriptor: PathBuf,
    pub sources: PathBuf,
}

#[derive(Clone)]
pub struct RemoteRepository {
    base_url: String,
    cache_dir: PathBuf,
    agent: ureq::Agent,
    locks: Arc<Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>>,
}

impl std::fmt::Debug for RemoteRepository {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteRepository")
            .field("base_url", &self.base_url)
            .field("cache_dir", &self.cache_dir)
            .finish()
    }
}

impl RemoteRepository {
    pub fn new(base_url: impl Into<String>, cache_dir: impl Into<PathBuf>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build();
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            cache_dir: cache_dir.into(),
            agent: ureq::Agent::new_with_config(config),
            locks: Arc::default(),
        }
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache_dir
    }

    fn entry_lock(&self, path: &Path) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(path.to_path_buf()).or_default().clone()
    }

    /// Returns cached copies when present; otherwise downloads them.
    pub fn fetch(&self, gav: &VersionedCoordinate) -> Result<FetchedArtifact, FetchError> {
        let (pom, sources) = repository_path(gav);
        Ok(FetchedArtifact {
            descriptor: self.fetch_file(&pom)?,
            sources: self.fetch_file(&sources)?,
        })
    }

    fn fetch_file(&self, rel: &str) -> Result<PathBuf, FetchError> {
        let target = self.cache_dir.join(rel);
        let lock = self.entry_lock(&target);
        let _guard = lock.lock().expect("cache entry lock poisoned");
        if target.is_file() {
            return Ok(target);
        }

        let url = format!("{}/{rel}", self.base_url);
        let response = self.agent.get(&url).call().map_err(|e| match e {
            ureq::Error::StatusCode(404) => FetchError::Missing { url: url.clone() },
            other => FetchError::Retryable { url: url.clone(), message: other.to_string() },
        })?;

        let cache_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| FetchError::Cache { path, source }
        };
        let parent = target.parent().expect("cache paths have a parent");
        std::fs::create_dir_all(parent).map_err(cache_err(parent))?;
        let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(cache_err(parent))?;
        let mut body = response.into_body();
        io::copy(&mut body.as_reader(), &mut tmp).map_err(|e| FetchError::Retryable {
            url: url.clone(),
            message: e.to_string(),
        })?;
        tmp.persist(&target).map_err(|e| FetchError::Cache { path: target.clone(), source: e.error })?;
        Ok(target)
    }
}

/// Own size of a library measured directly inside a sources archive.
pub fn count_sources_archive(path: &Path, profile: &LanguageProfile) -> Result<u64, FetchError> {
    let archive_err = |message: String| FetchError::Archive { path: path.to_path_buf(), message };
    let file = File::open(path).map_err(|source| FetchError::Cache { path: path.to_path_buf(), source })?;
    let mut zip = zip::ZipArchive::new(file).map_err(|e| archive_err(e.to_string()))?;
    let mut total = 0;
    for i in 0..zip.len() {
        let mut entry = zip.by_index(i).map_err(|e| archive_err(e.to_string()))?;
        if !entry.is_file() || !profile.is_code_file(Path::new(entry.name())) {
            continue;
        }
        let mut bytes = Vec::with_capacity(entry.size() as usize);
        entry.read_to_end(&mut bytes).map_err(|e| archive_err(e.to_string()))?;
        total += count_text_loc(&String::from_utf8_lossy(&bytes), profile);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn gav(s: &str) -> VersionedCoordinate {
        s.parse().unwrap()
    }

    #[test]
    fn layout_matches_repository_convention() {
        let (pom, src) = repository_path(&gav("org.slf4j:slf4j-api:1.7.25"));
        assert_eq!(src, "org/slf4j/slf4j-api/1.7.25/slf4j-api-1.7.25-sources.jar");
        assert_eq!(pom, "org/slf4j/slf4j-api/1.7.25/slf4j-api-1.7.25.pom");
    }

    fn sources_jar() -> Vec<u8> {
        let mut buf = io::Cursor::new(Vec::new());
        {
            let mut w = zip::ZipWriter::new(&mut buf);
            let opts = zip::write::SimpleFileOptions::default()
                .compression_method(zip::CompressionMethod::Stored);
            w.start_file("org/x/A.java", opts).unwrap();
            w.write_all(b"class A {\n  // c\n  int a;\n}\n").unwrap();
            w.start_file("META-INF/MANIFEST.MF", opts).unwrap();
            w.write_all(b"Manifest-Version: 1.0\n").unwrap();
            w.finish().unwrap();
        }
        buf.into_inner()
    }

    /// Serves `files` over HTTP/1.1, 404 for anything else, counting requests.
    fn serve(files: Vec<(String, Vec<u8>)>) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                counter.fetch_add(1, Ordering::SeqCst);
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                        break;
                    }
                }
                let path = request_line.split_whitespace().nth(1).unwrap_or("").trim_start_matches('/');
                match files.iter().find(|(p, _)| p == path) {
                    Some((_, body)) => {
                        write!(stream, "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n", body.len()).unwrap();
                        stream.write_all(body).unwrap();
                    }
                    None => {
                        write!(stream, "HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n").unwrap();
                    }
                }
            }
        });
        (base, hits)
    }

    #[test]
    fn downloads_once_then_hits_cache() {
        let coordinate = gav("org.x:lib:1.0");
        let (pom, src) = repository_path(&coordinate);
        let (base, hits) = serve(vec![(pom, b"<project/>".to_vec()), (src, sources_jar())]);
        let cache = tempfile::tempdir().unwrap();
        let repo = RemoteRepository::new(base, cache.path());

        let first = repo.fetch(&coordinate).unwrap();
        assert_eq!(hits.load(Ordering::SeqCst), 2);
        assert!(first.sources.starts_with(cache.path()));
        assert!(first.sources.ends_with("org/x/lib/1.0/lib-1.0-sources.jar"));

        let second = repo.fetch(&coordinate).unwrap();
        assert_eq!(first, second);
        assert_eq!(hits.load(Ordering::SeqCst), 2);

        assert_eq!(count_sources_archive(&first.sources, &LanguageProfile::java()).unwrap(), 3);
    }

    #[test]
    fn warm_cache_needs_no_network() {
        let cache = tempfile::tempdir().unwrap();
        let coordinate = gav("a.b:c:2");
        for rel in [repository_path(&coordinate).0, repository_path(&coordinate).1] {
            let p = cache.path().join(rel);
            std::fs::create_dir_all(p.parent().unwrap()).unwrap();
            std::fs::write(p, b"x").unwrap();
        }
        // Port 9 (discard) on localhost: any network attempt would fail.
        let repo = RemoteRepository::new("http://127.0.0.1:9", cache.path());
        assert!(repo.fetch(&coordinate).is_ok());
    }

    #[test]
    fn unknown_coordinate_is_missing_artifact() {
        let (base, _) = serve(vec![]);
        let cache = tempfile::tempdir().unwrap();
        let repo = RemoteRepository::new(base, cache.path());
        assert!(matches!(repo.fetch(&gav("no:such:1")), Err(FetchError::Missing { .. })));
    }

    #[test]
    fn connection_failure_is_retryable() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let cache = tempfile::tempdir().unwrap();
        let repo = RemoteRepository::new(format!("http://{addr}"), cache.path());
        assert!(matches!(repo.fetch(&gav("a:b:1")), Err(FetchError::Retryable { .. })));
    }
}
