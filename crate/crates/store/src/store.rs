use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use audiology_core::{Category, DomainError, ExamAggregate, ExamKey, Record, Validate};

use crate::error::{Result, StoreError};
use crate::format::{split_frames, FrameCipher, Header, Op, HEADER_LEN, SCHEMA_VERSION};
use crate::key::StoreKey;
use crate::search::{sort_hits, summarize, SearchCriteria, SearchHit};

type Table = BTreeMap<ExamKey, Record>;

fn empty_tables() -> BTreeMap<Category, Table> {
    Category::ALL.into_iter().map(|c| (c, Table::new())).collect()
}

struct OpenState {
    key: StoreKey,
    file: File,
    cipher: FrameCipher,
    next_seq: u64,
    len: u64,
    tables: BTreeMap<Category, Table>,
}

impl OpenState {
    /// Appends one batch durably, then applies it to the in-memory tables.
    /// A failed write is rolled back so the file never keeps a partial frame.
    fn commit(&mut self, ops: Vec<Op>) -> Result<()> {
        let frame = self.cipher.seal(self.next_seq, &ops);
        let written = self
            .file
            .seek(SeekFrom::Start(self.len))
            .and_then(|_| self.file.write_all(&frame))
            .and_then(|_| self.file.sync_data());
        if let Err(e) = written {
            let _ = self.file.set_len(self.len);
            return Err(e.into());
        }
        self.next_seq += 1;
        self.len += frame.len() as u64;
        for op in ops {
            apply(&mut self.tables, op)?;
        }
        Ok(())
    }
}

fn apply(tables: &mut BTreeMap<Category, Table>, op: Op) -> Result<()> {
    match op {
        Op::Check { .. } => {}
        Op::Put { table, key, record } => {
            let category = table_category(&table)?;
            let record = Record::from_json(category, record)?;
            if record.key() != &key {
                return Err(DomainError::KeyMismatch { expected: key, found: record.key().clone() }.into());
            }
            tables.entry(category).or_default().insert(key, record);
        }
        Op::Delete { table, key } => {
            tables.entry(table_category(&table)?).or_default().remove(&key);
        }
    }
    Ok(())
}

fn table_category(table: &str) -> Result<Category> {
    Category::from_table_name(table).ok_or_else(|| DomainError::UnknownCategory(table.to_string()).into())
}

fn put(record: &Record) -> Op {
    Op::Put {
        table: record.category().table_name().to_string(),
        key: record.key().clone(),
        record: record.to_json(),
    }
}

fn new_file(path: &Path) -> io::Result<File> {
    let mut options = OpenOptions::new();
    options.read(true).write(true).create_new(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        options.mode(0o600);
    }
    options.open(path)
}

fn lock(file: &File, path: &Path) -> Result<()> {
    match file.try_lock() {
        Ok(()) => Ok(()),
        Err(fs::TryLockError::WouldBlock) => Err(StoreError::Locked(path.to_path_buf())),
        Err(fs::TryLockError::Error(e)) => Err(e.into()),
    }
}

/// Writes a fresh store file holding `records` and returns its state.
fn write_new(path: &Path, key: &StoreKey, tables: BTreeMap<Category, Table>) -> Result<OpenState> {
    let mut file = new_file(path).map_err(|e| match e.kind() {
        io::ErrorKind::AlreadyExists => StoreError::AlreadyExists(path.to_path_buf()),
        _ => e.into(),
    })?;
    lock(&file, path)?;
    let header = Header::fresh();
    let cipher = FrameCipher::new(key, &header);
    let mut bytes = header.encode().to_vec();
    bytes.extend(cipher.seal(0, &[Op::check()]));
    let mut next_seq = 1;
    let ops: Vec<Op> = tables.values().flat_map(|t| t.values().map(put)).collect();
    if !ops.is_empty() {
        bytes.extend(cipher.seal(1, &ops));
        next_seq = 2;
    }
    file.write_all(&bytes)?;
    file.sync_all()?;
    Ok(OpenState { key: key.clone(), file, cipher, next_seq, len: bytes.len() as u64, tables })
}

fn sync_dir(path: &Path) {
    #[cfg(unix)]
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    #[cfg(not(unix))]
    let _ = path;
}

/// Encrypted single-file store of exam records, one logical table per
/// category.
///
/// The file is an append-only log of authenticated batches replayed into
/// memory on open. Writers are serialized and readers run concurrently; an
/// advisory lock keeps other processes out while the store is open.
pub struct Store {
    path: PathBuf,
    state: RwLock<Option<OpenState>>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").field("path", &self.path).field("open", &self.is_open()).finish()
    }
}

impl Store {
    pub fn create(path: impl AsRef<Path>, key: &StoreKey) -> Result<Store> {
        let path = path.as_ref().to_path_buf();
        let state = write_new(&path, key, empty_tables())?;
        sync_dir(&path);
        Ok(Store { path, state: RwLock::new(Some(state)) })
    }

    pub fn open(path: impl AsRef<Path>, key: &StoreKey) -> Result<Store> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().read(true).write(true).open(&path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => StoreError::NotFound(path.clone()),
            _ => e.into(),
        })?;
        lock(&file, &path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let header = Header::decode(&bytes).ok_or_else(|| StoreError::NotAStore(path.clone()))?;
        if header.version > SCHEMA_VERSION {
            return Err(StoreError::UnsupportedVersion { found: header.version, supported: SCHEMA_VERSION });
        }
        let cipher = FrameCipher::new(key, &header);
        let (frames, end) = split_frames(&bytes[HEADER_LEN..]);
        let mut tables = empty_tables();
        let mut seq = 0u64;
        for frame in &frames {
            let ops = cipher.open(seq, frame).ok_or(StoreError::AuthenticationFailure)?;
            if seq == 0 {
                if !(ops.len() == 1 && ops[0].is_check()) {
                    return Err(StoreError::AuthenticationFailure);
                }
            } else {
                for op in ops {
                    apply(&mut tables, op)?;
                }
            }
            seq += 1;
        }
        if seq == 0 {
            return Err(StoreError::AuthenticationFailure);
        }
        let len = (HEADER_LEN + end) as u64;
        if len < bytes.len() as u64 {
            file.set_len(len)?;
            file.sync_all()?;
        }
        let state = OpenState { key: key.clone(), file, cipher, next_seq: seq, len, tables };
        Ok(Store { path, state: RwLock::new(Some(state)) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn schema_version(&self) -> u32 {
        SCHEMA_VERSION
    }

    pub fn is_open(&self) -> bool {
        self.state.read().map(|s| s.is_some()).unwrap_or(false)
    }

    fn read(&self) -> Result<RwLockReadGuard<'_, Option<OpenState>>> {
        let guard = self.state.read().unwrap_or_else(|e| e.into_inner());
        if guard.is_none() {
            return Err(StoreError::Closed);
        }
        Ok(guard)
    }

    fn write(&self) -> Result<RwLockWriteGuard<'_, Option<OpenState>>> {
        let guard = self.state.write().unwrap_or_else(|e| e.into_inner());
        if guard.is_none() {
            return Err(StoreError::Closed);
        }
        Ok(guard)
    }

    fn with_read<T>(&self, f: impl FnOnce(&OpenState) -> T) -> Result<T> {
        let guard = self.read()?;
        Ok(f(guard.as_ref().expect("checked open")))
    }

    /// Releases the file; later calls fail with [`StoreError::Closed`].
    pub fn close(&self) -> Result<()> {
        let mut guard = self.write()?;
        *guard = None;
        Ok(())
    }

    /// Stores `record` under its key, replacing any previous value.
    pub fn upsert(&self, record: Record) -> Result<()> {
        self.upsert_many(vec![record])
    }

    /// Stores all records in one atomic batch: either every record is
    /// written or none is.
    pub fn upsert_many(&self, records: Vec<Record>) -> Result<()> {
        let mut guard = self.write()?;
        for r in &records {
            r.validate()?;
        }
        if records.is_empty() {
            return Ok(());
        }
        let ops = records.iter().map(put).collect();
        guard.as_mut().expect("checked open").commit(ops)
    }

    pub fn get(&self, key: &ExamKey, category: Category) -> Result<Option<Record>> {
        self.with_read(|s| s.tables.get(&category).and_then(|t| t.get(key)).cloned())
    }

    /// All stored categories of one exam. Missing rows leave slots empty.
    pub fn get_exam(&self, key: &ExamKey) -> Result<ExamAggregate> {
        self.with_read(|s| {
            let mut agg = ExamAggregate::empty(key.clone());
            for table in s.tables.values() {
                if let Some(r) = table.get(key) {
                    agg.set(r.clone()).expect("rows are stored under their own key");
                }
            }
            agg
        })
    }

    /// Removes the exam from every table in one atomic batch and returns the
    /// number of rows removed.
    pub fn delete_exam(&self, key: &ExamKey) -> Result<usize> {
        let mut guard = self.write()?;
        let state = guard.as_mut().expect("checked open");
        let ops: Vec<Op> = state
            .tables
            .iter()
            .filter(|(_, t)| t.contains_key(key))
            .map(|(c, _)| Op::Delete { table: c.table_name().to_string(), key: key.clone() })
            .collect();
        let n = ops.len();
        if n > 0 {
            state.commit(ops)?;
        }
        Ok(n)
    }

    /// Every exam key with at least one row, in key order.
    pub fn exam_keys(&self) -> Result<Vec<ExamKey>> {
        self.with_read(|s| {
            let mut keys: Vec<ExamKey> = s.tables.values().flat_map(|t| t.keys().cloned()).collect();
            keys.sort();
            keys.dedup();
            keys
        })
    }

    /// Row count per table name, covering all tables.
    pub fn table_sizes(&self) -> Result<BTreeMap<&'static str, usize>> {
        self.with_read(|s| s.tables.iter().map(|(c, t)| (c.table_name(), t.len())).collect())
    }

    /// All rows, table by table in category order.
    pub fn rows(&self) -> Result<Vec<Record>> {
        self.with_read(|s| s.tables.values().flat_map(|t| t.values().cloned()).collect())
    }

    pub fn search(&self, criteria: &SearchCriteria) -> Result<Vec<SearchHit>> {
        if criteria.is_empty() {
            return Err(StoreError::EmptyCriteria);
        }
        self.with_read(|s| {
            let patients = &s.tables[&Category::Patient];
            let mut seen = std::collections::BTreeSet::new();
            let mut hits = Vec::new();
            for key in s.tables.values().flat_map(|t| t.keys()) {
                if !seen.insert(key) {
                    continue;
                }
                let (name, diagnosis) = match patients.get(key) {
                    Some(Record::Patient(p)) => (p.name.as_str(), p.diagnosis.as_str()),
                    _ => ("", ""),
                };
                if criteria.matches(key, name) {
                    hits.push(SearchHit {
                        key: key.clone(),
                        patient_name: name.to_string(),
                        diagnosis_summary: summarize(diagnosis),
                    });
                }
            }
            sort_hits(&mut hits);
            hits
        })
    }

    /// Rewrites the log with only live rows, replacing the file atomically.
    pub fn compact(&self) -> Result<()> {
        let mut guard = self.write()?;
        let state = guard.as_mut().expect("checked open");
        let name = self.path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let tmp = self.path.with_file_name(format!(".{name}.compact"));
        let _ = fs::remove_file(&tmp);
        let fresh = write_new(&tmp, &state.key, state.tables.clone())?;
        if let Err(e) = fs::rename(&tmp, &self.path) {
            let _ = fs::remove_file(&tmp);
            return Err(e.into());
        }
        sync_dir(&self.path);
        *state = fresh;
        Ok(())
    }

    /// Bytes currently used by the file.
    pub fn file_len(&self) -> Result<u64> {
        self.with_read(|s| s.len)
    }
}
