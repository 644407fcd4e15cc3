//! Course packages: a zip archive holding a `course.json` manifest plus the
//! description, starter and test files it references.
//!
//! The manifest schema is strict: unknown keys are rejected. Optional keys
//! beyond the core schema are `tracer`, `experiment`, `prompts` and, per
//! knowledge component, `description`, `bkt` and `pfa`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Course, DomainError, KnowledgeComponent, PromptOverrides, Result, Task};
use crate::archive::{self, ArchiveError};
use crate::learner::{BktParams, PfaParams, TracerKind};
use crate::outer_loop::{ExperimentConfig, PolicyConfig, PolicyKind};

pub const MANIFEST_NAME: &str = "course.json";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    course_id: String,
    title: String,
    policy_default: PolicyKind,
    #[serde(default, skip_serializing_if = "is_default_tracer")]
    tracer: TracerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    experiment: Option<ExperimentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prompts: Option<ManifestPrompts>,
    kcs: Vec<ManifestKc>,
    tasks: Vec<ManifestTask>,
}

fn is_default_tracer(t: &TracerKind) -> bool {
    *t == TracerKind::default()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestKc {
    kc_id: String,
    title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bkt: Option<BktParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pfa: Option<PfaParams>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestTask {
    task_id: String,
    title: String,
    description_file: String,
    starter_file: String,
    test_file: String,
    kc_ids: Vec<String>,
    difficulty: f64,
    curriculum_index: u32,
    time_limit_ms: u32,
    memory_limit_kb: u32,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestPrompts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hint_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    revision_file: Option<String>,
}

/// Parses and validates a course package. Nothing is returned unless the
/// whole package is valid.
pub fn load_course_package(package_bytes: &[u8]) -> Result<Course> {
    let entries = archive::read_entries(package_bytes).map_err(|e| match e {
        ArchiveError::TooLarge(name) => {
            DomainError::MalformedArchive(format!("entry `{name}` is too large"))
        }
        other => DomainError::MalformedArchive(other.to_string()),
    })?;
    if entries.is_empty() {
        return Err(DomainError::MalformedArchive("archive is empty".into()));
    }
    let root = package_root(&entries)?;
    let files = PackageFiles {
        entries: &entries,
        root: &root,
    };

    let manifest_bytes = files.get(MANIFEST_NAME).expect("root contains the manifest");
    let mut de = serde_json::Deserializer::from_slice(manifest_bytes);
    let manifest: Manifest = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        DomainError::schema(
            if path == "." { MANIFEST_NAME.to_string() } else { path },
            e.into_inner().to_string(),
        )
    })?;

    let mut tasks = Vec::with_capacity(manifest.tasks.len());
    for (i, t) in manifest.tasks.into_iter().enumerate() {
        tasks.push(Task {
            description_markdown: files.text(&t.description_file, &format!("tasks[{i}].description_file"))?,
            starter_code: files.text(&t.starter_file, &format!("tasks[{i}].starter_file"))?,
            test_script: files.text(&t.test_file, &format!("tasks[{i}].test_file"))?,
            task_id: t.task_id,
            title: t.title,
            kc_ids: t.kc_ids,
            difficulty: t.difficulty,
            curriculum_index: t.curriculum_index,
            time_limit_ms: t.time_limit_ms,
            memory_limit_kb: t.memory_limit_kb,
        });
    }
    let prompts = match manifest.prompts {
        None => PromptOverrides::default(),
        Some(p) => PromptOverrides {
            step: p.step_file.map(|f| files.text(&f, "prompts.step_file")).transpose()?,
            hint: p.hint_file.map(|f| files.text(&f, "prompts.hint_file")).transpose()?,
            revision: p
                .revision_file
                .map(|f| files.text(&f, "prompts.revision_file"))
                .transpose()?,
        },
    };

    Course {
        course_id: manifest.course_id,
        title: manifest.title,
        policy_default: PolicyConfig::new(manifest.policy_default),
        tracer: manifest.tracer,
        experiment: manifest.experiment,
        prompts,
        kcs: manifest
            .kcs
            .into_iter()
            .map(|k| KnowledgeComponent {
                kc_id: k.kc_id,
                title: k.title,
                description: k.description,
                bkt: k.bkt,
                pfa: k.pfa,
            })
            .collect(),
        tasks,
    }
    .validate()
}

/// Locates the manifest either at the archive root or inside a single
/// top-level directory (as produced by zipping a folder).
fn package_root(entries: &BTreeMap<String, Vec<u8>>) -> Result<String> {
    if entries.contains_key(MANIFEST_NAME) {
        return Ok(String::new());
    }
    let nested: Vec<&String> = entries
        .keys()
        .filter(|k| {
            k.strip_suffix(MANIFEST_NAME)
                .is_some_and(|prefix| prefix.ends_with('/') && prefix.matches('/').count() == 1)
        })
        .collect();
    match nested.as_slice() {
        [one] => Ok(one[..one.len() - MANIFEST_NAME.len()].to_string()),
        _ => Err(DomainError::MalformedArchive(format!(
            "archive has no `{MANIFEST_NAME}` manifest"
        ))),
    }
}

struct PackageFiles<'a> {
    entries: &'a BTreeMap<String, Vec<u8>>,
    root: &'a str,
}

impl PackageFiles<'_> {
    fn get(&self, name: &str) -> Option<&Vec<u8>> {
        let name = name.strip_prefix("./").unwrap_or(name);
        self.entries.get(&format!("{}{}", self.root, name))
    }

    fn text(&self, name: &str, manifest_path: &str) -> Result<String> {
        let bytes = self
            .get(name)
            .ok_or_else(|| DomainError::schema(manifest_path, format!("`{name}` not in archive")))?;
        String::from_utf8(bytes.clone())
            .map_err(|_| DomainError::schema(manifest_path, format!("`{name}` is not UTF-8")))
    }
}

/// Serialises a course into a package that loads back to an equal course.
pub fn write_course_package(course: &Course) -> Result<Vec<u8>> {
    let mut files: Vec<(String, String)> = Vec::new();
    let tasks = course
        .tasks
        .iter()
        .map(|t| {
            let dir = format!("tasks/{}", t.task_id);
            let task = ManifestTask {
                task_id: t.task_id.clone(),
                title: t.title.clone(),
                description_file: format!("{dir}/description.md"),
                starter_file: format!("{dir}/starter.py"),
                test_file: format!("{dir}/test.py"),
                kc_ids: t.kc_ids.clone(),
                difficulty: t.difficulty,
                curriculum_index: t.curriculum_index,
                time_limit_ms: t.time_limit_ms,
                memory_limit_kb: t.memory_limit_kb,
            };
            files.push((task.description_file.clone(), t.description_markdown.clone()));
            files.push((task.starter_file.clone(), t.starter_code.clone()));
            files.push((task.test_file.clone(), t.test_script.clone()));
            task
        })
        .collect();

    let mut prompt_file = |kind: &str, text: &Option<String>| {
        text.as_ref().map(|t| {
            let name = format!("prompts/{kind}.txt");
            files.push((name.clone(), t.clone()));
            name
        })
    };
    let prompts = (!course.prompts.is_empty()).then(|| ManifestPrompts {
        step_file: prompt_file("step", &course.prompts.step),
        hint_file: prompt_file("hint", &course.prompts.hint),
        revision_file: prompt_file("revision", &course.prompts.revision),
    });

    if course.policy_default != PolicyConfig::new(course.policy_default.kind) {
        return Err(DomainError::schema(
            "policy_default",
            "only the default mastery threshold can be expressed in a package",
        ));
    }
    let manifest = Manifest {
        course_id: course.course_id.clone(),
        title: course.title.clone(),
        policy_default: course.policy_default.kind,
        tracer: course.tracer,
        experiment: course.experiment.clone(),
        prompts,
        kcs: course
            .kcs
            .iter()
            .map(|k| ManifestKc {
                kc_id: k.kc_id.clone(),
                title: k.title.clone(),
                description: k.description.clone(),
                bkt: k.bkt,
                pfa: k.pfa,
            })
            .collect(),
        tasks,
    };
    let manifest_json = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| DomainError::schema(MANIFEST_NAME, e.to_string()))?;

    let mut entries: Vec<(&str, &[u8])> = vec![(MANIFEST_NAME, &manifest_json)];
    entries.extend(files.iter().map(|(n, c)| (n.as_str(), c.as_bytes())));
    archive::write_entries(entries).map_err(|e| DomainError::MalformedArchive(e.to_string()))
}

/// Zips a package directory (manifest at its root) into package bytes.
pub fn pack_dir(dir: &Path) -> std::io::Result<Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) -> std::io::Result<()> {
        let mut children: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
        children.sort_by_key(|e| e.file_name());
        for child in children {
            let path = child.path();
            if child.file_type()?.is_dir() {
                walk(base, &path, out)?;
            } else {
                let rel = path
                    .strip_prefix(base)
                    .expect("child of base")
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join("/");
                out.push((rel, std::fs::read(&path)?));
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, dir, &mut files)?;
    archive::write_entries(files.iter().map(|(n, c)| (n.as_str(), c.as_slice())))
        .map_err(|e| std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::test_support::course_with_tasks;

    fn zip(entries: &[(&str, &str)]) -> Vec<u8> {
        archive::write_entries(entries.iter().map(|(n, c)| (*n, c.as_bytes()))).unwrap()
    }

    fn manifest_with(task_extra: &str) -> String {
        format!(
            r#"{{"course_id":"c","title":"C","policy_default":"fixed_curriculum",
            "kcs":[{{"kc_id":"k1","title":"K1"}}],
            "tasks":[{{"task_id":"t1","title":"T1","description_file":"d.md",
            "starter_file":"s.py","test_file":"t.py","kc_ids":["k1"],"difficulty":0.5,
            "curriculum_index":0,"time_limit_ms":5000,"memory_limit_kb":131072{task_extra}}}]}}"#
        )
    }

    fn package(manifest: &str) -> Vec<u8> {
        zip(&[
            ("course.json", manifest),
            ("d.md", "desc"),
            ("s.py", "x = 1\n"),
            ("t.py", "# SCRIPT-TESTS: 1\nprint('SCRIPT-TEST 1 PASS')\n"),
        ])
    }

    #[test]
    fn minimal_package_loads() {
        let course = load_course_package(&package(&manifest_with(""))).unwrap();
        assert_eq!(course.tasks.len(), 1);
        assert_eq!(course.tasks[0].starter_code, "x = 1\n");
        assert_eq!(course.tasks[0].declared_tests(), Some(1));
    }

    #[test]
    fn empty_zip_is_malformed() {
        let empty = archive::write_entries(std::iter::empty()).unwrap();
        assert!(matches!(
            load_course_package(&empty),
            Err(DomainError::MalformedArchive(_))
        ));
        assert!(matches!(
            load_course_package(b"PK\x03\x04junk"),
            Err(DomainError::MalformedArchive(_))
        ));
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_path() {
        let err = load_course_package(&package(&manifest_with(r#","points":3"#))).unwrap_err();
        match err {
            DomainError::ManifestSchemaError { path, .. } => assert!(path.starts_with("tasks[0]")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_referenced_file_is_a_schema_error() {
        let bytes = zip(&[("course.json", &manifest_with("")), ("d.md", "desc")]);
        assert!(matches!(
            load_course_package(&bytes),
            Err(DomainError::ManifestSchemaError { path, .. }) if path == "tasks[0].starter_file"
        ));
    }

    #[test]
    fn manifest_inside_single_folder_is_found() {
        let bytes = zip(&[
            ("pkg/course.json", &manifest_with("")),
            ("pkg/d.md", "desc"),
            ("pkg/s.py", ""),
            ("pkg/t.py", "# SCRIPT-TESTS: 2\n"),
        ]);
        let course = load_course_package(&bytes).unwrap();
        assert_eq!(course.tasks[0].declared_tests(), Some(2));
    }

    #[test]
    fn course_round_trips_through_a_package() {
        let mut course = course_with_tasks(&[("b", &["k2", "k1"], 0.3), ("a", &["k1"], 1.0)]);
        course.kcs[0].bkt = Some(BktParams::new(0.3, 0.2, 0.05, 0.25).unwrap());
        course.kcs[1].description = Some("about k1".into());
        course.prompts.hint = Some("H {current_code}".into());
        course.tracer = TracerKind::Pfa;
        let bytes = write_course_package(&course).unwrap();
        assert_eq!(load_course_package(&bytes).unwrap(), course);
    }
}
