//! Refactoring scaffolds: split a monolithic class into an interface module
//! plus a private implementation module, emit a runtime backend binder, and
//! emit a lazy public namespace.
//!
//! Rendering is a pure function of the plan. Output formatting is fixed
//! (4-space indent, one blank line between methods, two blank lines between
//! top-level items) so golden-file tests can compare bytes.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ast::{NodeKind, ParamAttr, SyntaxNode};
use crate::detect::{detect_class_pimpl, ImplPattern};
use crate::parser::ParsedModule;
use crate::source::is_identifier;
use crate::visibility::{classify_name, top_level_bound_names, VisibilityClass};

#[derive(Debug, Error)]
pub enum ScaffoldError {
    #[error("class `{0}` not found at module top level")]
    ClassNotFound(String),
    #[error("class `{class}` already delegates through `{attr}`")]
    AlreadyPimpl { class: String, attr: String },
    #[error("class `{0}` has no public methods to expose")]
    NoPublicMethods(String),
    #[error("method bodies reference module-level names that cannot move: {}", .0.join(", "))]
    GlobalReferences(Vec<String>),
    #[error("factory needs at least two backends")]
    TooFewBackends,
    #[error("duplicate factory literal `{0}`")]
    DuplicateLiteral(String),
    #[error("lazy namespace needs at least one entry")]
    EmptyEntries,
    #[error("duplicate public name `{0}`")]
    DuplicateName(String),
    #[error("`{0}` is not a valid identifier or module path")]
    InvalidName(String),
    #[error("refusing to overwrite `{0}` (pass the overwrite flag to replace it)")]
    PathCollision(PathBuf),
    #[error("io error writing `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Where a method ends up after the split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodRole {
    /// Original `__init__`; its body moves, the interface synthesizes a new one.
    Init,
    /// Public method: signature on the interface, body on the implementation.
    Public,
    /// Internal or dunder method: moves wholesale to the implementation.
    Hidden,
}

#[derive(Clone, Debug)]
pub struct MethodPlan {
    pub name: String,
    /// Verbatim parameter list, including `self`.
    pub params_text: String,
    /// Arguments that forward the parameters, `self` excluded (`*args` and
    /// `**kwargs` keep their stars).
    pub forward_args: Vec<String>,
    /// Verbatim docstring literal, when present.
    pub docstring: Option<String>,
    /// Dedented verbatim body lines, docstring excluded.
    pub body_lines: Vec<String>,
    pub role: MethodRole,
}

#[derive(Clone, Debug)]
pub struct ScaffoldPlan {
    pub class_name: String,
    pub impl_class_name: String,
    /// Dotted module path of the implementation module (e.g. `impl._widget`).
    pub impl_module: String,
    pub interface_path: String,
    pub impl_path: String,
    /// All methods in source order.
    pub methods: Vec<MethodPlan>,
    /// `self.<attr>` names that migrate to the implementation.
    pub moved_state: Vec<String>,
    /// Render the import inside `__init__` to dodge a module-level cycle.
    pub defer_import: bool,
    /// Optional runtime binder: (literal, backend class, backend module).
    pub factory: Option<Vec<(String, String, String)>>,
    /// Optional lazy namespace: (public name, origin module, origin name).
    pub lazy_entries: Option<Vec<(String, String, String)>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderedFile {
    pub path: String,
    pub text: String,
}

#[derive(Clone, Debug)]
pub struct ScaffoldOptions {
    /// Directory component housing implementation modules.
    pub impl_dir: String,
    pub defer_import: bool,
    pub factory: Option<Vec<(String, String, String)>>,
    pub lazy_entries: Option<Vec<(String, String, String)>>,
}

impl Default for ScaffoldOptions {
    fn default() -> Self {
        ScaffoldOptions {
            impl_dir: "impl".to_string(),
            defer_import: false,
            factory: None,
            lazy_entries: None,
        }
    }
}

/// Plans the interface/implementation split of one top-level class.
///
/// Refuses classes that already hold an impl-pattern attribute, classes with
/// no public methods, and classes whose method bodies read module-level
/// bindings (those cannot move without behavior analysis).
pub fn plan_class_split(
    module: &ParsedModule,
    class_name: &str,
    options: &ScaffoldOptions,
) -> Result<ScaffoldPlan, ScaffoldError> {
    let class = module
        .tree
        .children
        .iter()
        .find(|s| s.kind == NodeKind::ClassDef && s.ident() == Some(class_name))
        .ok_or_else(|| ScaffoldError::ClassNotFound(class_name.to_string()))?;

    if let Some(report) = detect_class_pimpl(class, &ImplPattern::default()) {
        return Err(ScaffoldError::AlreadyPimpl {
            class: class_name.to_string(),
            attr: report.impl_attr,
        });
    }

    let lines: Vec<&str> = module.file.text.lines().collect();
    let mut methods = Vec::new();
    let mut moved_state: Vec<String> = Vec::new();
    let mut seen_state = BTreeSet::new();
    for stmt in class.class_body() {
        if stmt.kind != NodeKind::FunctionDef {
            continue;
        }
        let name = stmt.ident().unwrap_or_default().to_string();
        let role = if name == "__init__" {
            MethodRole::Init
        } else {
            match classify_name(&name) {
                VisibilityClass::Public => MethodRole::Public,
                _ => MethodRole::Hidden,
            }
        };
        methods.push(method_plan(stmt, name, role, &lines, &module.file.text));
        stmt.walk(&mut |node| {
            if node.kind == NodeKind::Assign {
                for target in node.assign_targets() {
                    if let Some(attr) = self_attr(target) {
                        if seen_state.insert(attr.to_string()) {
                            moved_state.push(attr.to_string());
                        }
                    }
                }
            }
        });
    }
    if !methods.iter().any(|m| m.role == MethodRole::Public) {
        return Err(ScaffoldError::NoPublicMethods(class_name.to_string()));
    }

    let globals = referenced_globals(class, &module.tree);
    if !globals.is_empty() {
        return Err(ScaffoldError::GlobalReferences(globals));
    }

    let snake = snake_case(class_name);
    let impl_dir = options.impl_dir.clone();
    Ok(ScaffoldPlan {
        class_name: class_name.to_string(),
        impl_class_name: format!("_{class_name}Impl"),
        impl_module: format!("{impl_dir}._{snake}"),
        interface_path: format!("{snake}.py"),
        impl_path: format!("{impl_dir}/_{snake}.py"),
        methods,
        moved_state,
        defer_import: options.defer_import,
        factory: options.factory.clone(),
        lazy_entries: options.lazy_entries.clone(),
    })
}

fn method_plan(
    func: &SyntaxNode,
    name: String,
    role: MethodRole,
    lines: &[&str],
    text: &str,
) -> MethodPlan {
    let params_text = func
        .params()
        .iter()
        .map(|p| slice_span(text, p.span))
        .collect::<Vec<_>>()
        .join(", ");
    let forward_args = func
        .params()
        .iter()
        .filter_map(|p| p.param_attr())
        .filter(|p| p.name != "self" && p.name != "cls")
        .filter_map(|p| match p.star {
            0 => Some(p.name.clone()),
            1 if !p.name.is_empty() => Some(format!("*{}", p.name)),
            2 => Some(format!("**{}", p.name)),
            _ => None,
        })
        .collect();

    let mut body = func.func_body();
    let mut docstring = None;
    if body.first().map(|s| s.kind) == Some(NodeKind::Docstring) {
        let doc = body.remove(0);
        docstring = Some(slice_span(text, doc.span));
    }
    let body_lines = if body.is_empty() {
        Vec::new()
    } else {
        let first_line = body.first().unwrap().span.start_line as usize;
        let last_line = body.last().unwrap().span.end_line as usize;
        dedent(&lines[first_line - 1..last_line])
    };
    MethodPlan {
        name,
        params_text,
        forward_args,
        docstring,
        body_lines,
        role,
    }
}

fn slice_span(text: &str, span: crate::source::Span) -> String {
    text.get(span.start_offset..span.end_offset)
        .unwrap_or_default()
        .to_string()
}

fn dedent(lines: &[&str]) -> Vec<String> {
    let indent = lines
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start().len())
        .min()
        .unwrap_or(0);
    lines
        .iter()
        .map(|l| {
            if l.trim().is_empty() {
                String::new()
            } else {
                l[indent.min(l.len())..].to_string()
            }
        })
        .collect()
}

fn self_attr(expr: &SyntaxNode) -> Option<&str> {
    if expr.kind != NodeKind::Attribute {
        return None;
    }
    let receiver = expr.children.first()?;
    if receiver.kind == NodeKind::NameRef && receiver.ident() == Some("self") {
        expr.ident()
    } else {
        None
    }
}

/// Module-level bindings read by the class's method bodies. Moving those
/// bodies would break the references, so the plan refuses them.
fn referenced_globals(class: &SyntaxNode, module: &SyntaxNode) -> Vec<String> {
    let top: BTreeSet<String> = top_level_bound_names(module).into_iter().collect();
    let mut offending = BTreeSet::new();
    for stmt in class.class_body() {
        if stmt.kind != NodeKind::FunctionDef {
            continue;
        }
        let mut locals: BTreeSet<String> = stmt
            .params()
            .iter()
            .filter_map(|p| p.param_attr())
            .map(|p: &ParamAttr| p.name.clone())
            .collect();
        for body_stmt in stmt.func_body() {
            body_stmt.walk(&mut |node| {
                if node.kind == NodeKind::Assign {
                    for target in node.assign_targets() {
                        if target.kind == NodeKind::NameRef {
                            if let Some(n) = target.ident() {
                                locals.insert(n.to_string());
                            }
                        }
                    }
                }
            });
        }
        for body_stmt in stmt.func_body() {
            body_stmt.walk(&mut |node| {
                if node.kind == NodeKind::NameRef {
                    if let Some(name) = node.ident() {
                        if top.contains(name) && !locals.contains(name) {
                            offending.insert(name.to_string());
                        }
                    }
                }
            });
        }
    }
    offending.into_iter().collect()
}

pub fn snake_case(name: &str) -> String {
    let mut out = String::new();
    let chars: Vec<char> = name.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_uppercase() {
            let boundary = i > 0
                && (chars[i - 1].is_lowercase()
                    || chars[i - 1].is_ascii_digit()
                    || (chars.get(i + 1).map(|n| n.is_lowercase()).unwrap_or(false)
                        && chars[i - 1].is_uppercase()));
            if boundary {
                out.push('_');
            }
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// Renders the split (and any factory/lazy extras carried by the plan) into
/// deterministic file texts.
pub fn render_scaffold(plan: &ScaffoldPlan) -> Result<Vec<RenderedFile>, ScaffoldError> {
    let mut files = vec![
        RenderedFile {
            path: plan.interface_path.clone(),
            text: render_interface(plan),
        },
        RenderedFile {
            path: format!(
                "{}/__init__.py",
                plan.impl_path.split('/').next().unwrap_or("impl")
            ),
            text: "\"\"\"Internal implementation package.\"\"\"\n".to_string(),
        },
        RenderedFile {
            path: plan.impl_path.clone(),
            text: render_impl(plan),
        },
    ];
    if let Some(backends) = &plan.factory {
        files.push(render_factory(&plan.class_name, backends)?);
    }
    if let Some(entries) = &plan.lazy_entries {
        files.push(render_lazy_init(entries)?);
    }
    Ok(files)
}

fn module_alias(plan: &ScaffoldPlan) -> String {
    let last = plan
        .impl_module
        .rsplit('.')
        .next()
        .unwrap_or("_impl_module");
    last.to_string()
}

fn render_interface(plan: &ScaffoldPlan) -> String {
    let stem = plan.interface_path.trim_end_matches(".py");
    let alias = module_alias(plan);
    let init = plan.methods.iter().find(|m| m.role == MethodRole::Init);
    let init_params = init
        .map(|m| m.params_text.clone())
        .unwrap_or_else(|| "self".to_string());
    let init_forward = init
        .map(|m| m.forward_args.join(", "))
        .unwrap_or_default();

    let mut out = String::new();
    out.push_str(&format!("\"\"\"{stem}.py -- Public API module\"\"\"\n"));
    if !plan.defer_import {
        out.push('\n');
        out.push_str(&format!("import {} as {alias}\n", plan.impl_module));
        out.push('\n');
        out.push_str(&format!(
            "{impl} = {alias}.{impl}\n",
            impl = plan.impl_class_name
        ));
    }
    out.push_str("\n\n");
    out.push_str(&format!("class {}:\n", plan.class_name));
    if plan.defer_import {
        out.push_str(&format!("    def __init__({init_params}):\n"));
        out.push_str(&format!("        import {} as {alias}\n", plan.impl_module));
        out.push_str(&format!(
            "        self._impl = {alias}.{}({init_forward})\n",
            plan.impl_class_name
        ));
    } else {
        out.push_str(&format!("    def __init__({init_params}):\n"));
        out.push_str(&format!(
            "        self._impl = {}({init_forward})\n",
            plan.impl_class_name
        ));
    }
    for method in plan.methods.iter().filter(|m| m.role == MethodRole::Public) {
        out.push('\n');
        out.push_str(&format!("    def {}({}):\n", method.name, method.params_text));
        if let Some(doc) = &method.docstring {
            out.push_str(&format!("        {doc}\n"));
        }
        out.push_str(&format!(
            "        return self._impl.{}({})\n",
            method.name,
            method.forward_args.join(", ")
        ));
    }
    out
}

fn render_impl(plan: &ScaffoldPlan) -> String {
    let module_doc = plan.impl_module.clone();
    let mut out = String::new();
    out.push_str(&format!(
        "\"\"\"{module_doc}.py -- Private implementation module\"\"\"\n"
    ));
    out.push_str("\n\n");
    out.push_str(&format!("class {}:\n", plan.impl_class_name));
    let mut first = true;
    let mut wrote_any = false;
    for method in &plan.methods {
        if !first {
            out.push('\n');
        }
        first = false;
        wrote_any = true;
        out.push_str(&format!("    def {}({}):\n", method.name, method.params_text));
        // Hidden methods carry their docstring along; public docstrings live
        // on the interface.
        if method.role != MethodRole::Public {
            if let Some(doc) = &method.docstring {
                out.push_str(&format!("        {doc}\n"));
            }
        }
        if method.body_lines.is_empty() {
            out.push_str("        pass\n");
        } else {
            for line in &method.body_lines {
                if line.is_empty() {
                    out.push('\n');
                } else {
                    out.push_str(&format!("        {line}\n"));
                }
            }
        }
    }
    if !wrote_any {
        out.push_str("    pass\n");
    }
    out
}

/// Renders a runtime backend binder shaped like the delegating-messenger
/// pattern: a `bind(selector)` method comparing the lower-cased selector
/// against each literal, plus a guarded forwarding method.
pub fn render_factory(
    interface_name: &str,
    backends: &[(String, String, String)],
) -> Result<RenderedFile, ScaffoldError> {
    if backends.len() < 2 {
        return Err(ScaffoldError::TooFewBackends);
    }
    let mut literals = BTreeSet::new();
    for (literal, class, module) in backends {
        if !literals.insert(literal.clone()) {
            return Err(ScaffoldError::DuplicateLiteral(literal.clone()));
        }
        if !is_identifier(class) || !is_module_path(module) {
            return Err(ScaffoldError::InvalidName(format!("{module}.{class}")));
        }
    }
    if !is_identifier(interface_name) {
        return Err(ScaffoldError::InvalidName(interface_name.to_string()));
    }

    let snake = snake_case(interface_name);
    let mut out = String::new();
    out.push_str(&format!(
        "\"\"\"{snake}_factory.py -- Runtime backend binding\"\"\"\n"
    ));
    out.push('\n');
    let mut imported = BTreeSet::new();
    for (_, _, module) in backends {
        if imported.insert(module.clone()) {
            out.push_str(&format!("import {module} as {}\n", path_alias(module)));
        }
    }
    out.push_str("\n\n");
    out.push_str(&format!("class {interface_name}:\n"));
    out.push_str("    _pimpl = None\n");
    out.push('\n');
    out.push_str("    def bind(self, backend_type):\n");
    out.push_str("        \"\"\"Bind the private implementation instance.\"\"\"\n");
    out.push_str("        self._pimpl = None\n");
    for (index, (literal, class, module)) in backends.iter().enumerate() {
        let keyword = if index == 0 { "if" } else { "elif" };
        out.push_str(&format!(
            "        {keyword} backend_type.lower() == \"{literal}\":\n"
        ));
        out.push_str(&format!(
            "            self._pimpl = {}.{class}()\n",
            path_alias(module)
        ));
    }
    out.push_str("        else:\n");
    out.push_str("            raise RuntimeError\n");
    out.push('\n');
    out.push_str("    def dispatch(self, *args, **kwargs):\n");
    out.push_str("        \"\"\"Forward to the bound implementation.\"\"\"\n");
    out.push_str("        if not self._pimpl:\n");
    out.push_str("            raise RuntimeError\n");
    out.push_str("        return self._pimpl.dispatch(*args, **kwargs)\n");
    Ok(RenderedFile {
        path: format!("{snake}_factory.py"),
        text: out,
    })
}

fn path_alias(module: &str) -> String {
    module.rsplit('.').next().unwrap_or(module).to_string()
}

fn is_module_path(path: &str) -> bool {
    let trimmed = path.trim_start_matches('.');
    if trimmed.is_empty() {
        return !path.is_empty(); // purely relative like `.` is allowed
    }
    trimmed.split('.').all(is_identifier)
}

/// Renders a lazy public namespace: a curated `__all__` and a module-level
/// `__getattr__` resolving each name through a deferred import.
pub fn render_lazy_init(
    entries: &[(String, String, String)],
) -> Result<RenderedFile, ScaffoldError> {
    if entries.is_empty() {
        return Err(ScaffoldError::EmptyEntries);
    }
    let mut seen = BTreeSet::new();
    for (name, module, attr) in entries {
        if !seen.insert(name.clone()) {
            return Err(ScaffoldError::DuplicateName(name.clone()));
        }
        if !is_identifier(name) || !is_identifier(attr) || !is_module_path(module) {
            return Err(ScaffoldError::InvalidName(format!("{name}={module}:{attr}")));
        }
    }
    let mut out = String::new();
    out.push_str("\"\"\"Public namespace resolving entry points lazily.\"\"\"\n");
    out.push('\n');
    out.push_str("import importlib\n");
    out.push('\n');
    let listed = entries
        .iter()
        .map(|(name, _, _)| format!("\"{name}\""))
        .collect::<Vec<_>>()
        .join(", ");
    out.push_str(&format!("__all__ = [{listed}]\n"));
    out.push_str("\n\n");
    out.push_str("def __getattr__(name):\n");
    for (name, module, attr) in entries {
        out.push_str(&format!("    if name == \"{name}\":\n"));
        out.push_str(&format!("        from {module} import {attr}\n"));
        out.push_str(&format!("        return {attr}\n"));
    }
    out.push_str("    raise AttributeError(name)\n");
    Ok(RenderedFile {
        path: "__init__.py".to_string(),
        text: out,
    })
}

/// Writes rendered files under `out_dir`. Existing targets are a refusal
/// unless `overwrite` is set; an existing implementation-package
/// `__init__.py` is kept as-is.
pub fn write_files(
    files: &[RenderedFile],
    out_dir: &Path,
    overwrite: bool,
) -> Result<Vec<PathBuf>, ScaffoldError> {
    let mut written = Vec::new();
    for file in files {
        let target = out_dir.join(&file.path);
        if target.exists() {
            if file.path.ends_with("__init__.py") && file.path.contains('/') {
                continue; // keep an existing implementation-package init
            }
            if !overwrite {
                return Err(ScaffoldError::PathCollision(target));
            }
        }
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(|source| ScaffoldError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&target, &file.text).map_err(|source| ScaffoldError::Io {
            path: target.clone(),
            source,
        })?;
        written.push(target);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_module;
    use crate::source::{ModuleId, SourceFile};

    fn parsed(text: &str) -> ParsedModule {
        parse_module(SourceFile::new(
            "merged.py",
            ModuleId::from_dotted("merged").unwrap(),
            text,
        ))
    }

    const MERGED_WIDGET: &str = "\
class Widget:
    def __init__(self, config):
        self._state = \"initialized\"
        self._config = config

    def start(self):
        self._state = \"running\"

    def stop(self):
        self._state = \"stopped\"

    def status(self):
        return {
            \"state\": self._state,
            \"config\": dict(self._config),
        }
";

    #[test]
    fn widget_plan_moves_state_and_keeps_signatures() {
        let module = parsed(MERGED_WIDGET);
        let plan = plan_class_split(&module, "Widget", &ScaffoldOptions::default()).unwrap();
        assert_eq!(plan.impl_class_name, "_WidgetImpl");
        assert_eq!(plan.impl_module, "impl._widget");
        assert_eq!(plan.moved_state, vec!["_state", "_config"]);
        let public: Vec<&str> = plan
            .methods
            .iter()
            .filter(|m| m.role == MethodRole::Public)
            .map(|m| m.name.as_str())
            .collect();
        assert_eq!(public, vec!["start", "stop", "status"]);
    }

    #[test]
    fn rendered_widget_matches_canonical_shape() {
        let module = parsed(MERGED_WIDGET);
        let plan = plan_class_split(&module, "Widget", &ScaffoldOptions::default()).unwrap();
        let files = render_scaffold(&plan).unwrap();
        assert_eq!(files.len(), 3);
        let interface = &files[0];
        assert!(interface.text.contains("import impl._widget as _widget"));
        assert!(interface.text.contains("_WidgetImpl = _widget._WidgetImpl"));
        assert!(interface.text.contains("self._impl = _WidgetImpl(config)"));
        assert!(interface.text.contains("return self._impl.status()"));
        let impl_file = &files[2];
        assert!(impl_file.text.contains("class _WidgetImpl:"));
        assert!(impl_file.text.contains("\"config\": dict(self._config),"));
        // Every rendered file re-parses with zero unsupported statements and
        // ends with a newline.
        for file in &files {
            assert!(file.text.ends_with('\n'));
            let reparsed = parse_module(SourceFile::new(
                file.path.clone(),
                ModuleId::from_dotted("x").unwrap(),
                file.text.clone(),
            ));
            assert_eq!(reparsed.tree.count_kind(NodeKind::Unsupported), 0);
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let module = parsed(MERGED_WIDGET);
        let plan = plan_class_split(&module, "Widget", &ScaffoldOptions::default()).unwrap();
        assert_eq!(render_scaffold(&plan).unwrap(), render_scaffold(&plan).unwrap());
    }

    #[test]
    fn deferred_variant_imports_inside_init() {
        let module = parsed(MERGED_WIDGET);
        let options = ScaffoldOptions {
            defer_import: true,
            ..ScaffoldOptions::default()
        };
        let plan = plan_class_split(&module, "Widget", &options).unwrap();
        let files = render_scaffold(&plan).unwrap();
        let interface = &files[0];
        assert!(!interface.text.contains("\nimport impl._widget"));
        assert!(interface
            .text
            .contains("        import impl._widget as _widget\n"));
    }

    #[test]
    fn split_refuses_existing_wrappers_and_empty_interfaces() {
        let already = parsed(
            "class W:\n    def __init__(self):\n        self._impl = X()\n\n    def f(self):\n        return self._impl.f()\n",
        );
        assert!(matches!(
            plan_class_split(&already, "W", &ScaffoldOptions::default()),
            Err(ScaffoldError::AlreadyPimpl { .. })
        ));

        let no_public = parsed("class W:\n    def _hidden(self):\n        pass\n");
        assert!(matches!(
            plan_class_split(&no_public, "W", &ScaffoldOptions::default()),
            Err(ScaffoldError::NoPublicMethods(_))
        ));

        let missing = parsed("x = 1\n");
        assert!(matches!(
            plan_class_split(&missing, "W", &ScaffoldOptions::default()),
            Err(ScaffoldError::ClassNotFound(_))
        ));
    }

    #[test]
    fn split_refuses_bodies_reading_module_globals() {
        let text = "\
LIMIT = 10

class Meter:
    def read(self):
        return LIMIT
";
        let module = parsed(text);
        match plan_class_split(&module, "Meter", &ScaffoldOptions::default()) {
            Err(ScaffoldError::GlobalReferences(names)) => {
                assert_eq!(names, vec!["LIMIT"]);
            }
            other => panic!("expected global-reference refusal, got {other:?}"),
        }
    }

    #[test]
    fn private_helper_moves_to_the_impl_side_only() {
        let text = "\
class Fmt:
    def render(self, value):
        return self._fmt(value)

    def _fmt(self, value):
        return str(value)
";
        let module = parsed(text);
        let plan = plan_class_split(&module, "Fmt", &ScaffoldOptions::default()).unwrap();
        let files = render_scaffold(&plan).unwrap();
        let interface = &files[0];
        let impl_file = &files[2];
        assert!(!interface.text.contains("def _fmt"));
        assert!(interface.text.contains("return self._impl.render(value)"));
        assert!(impl_file.text.contains("def _fmt(self, value):"));
    }

    #[test]
    fn factory_validations() {
        let one = vec![("email".to_string(), "E".to_string(), "impl.e".to_string())];
        assert!(matches!(
            render_factory("M", &one),
            Err(ScaffoldError::TooFewBackends)
        ));
        let duplicate = vec![
            ("email".to_string(), "E".to_string(), "impl.e".to_string()),
            ("email".to_string(), "S".to_string(), "impl.s".to_string()),
        ];
        assert!(matches!(
            render_factory("M", &duplicate),
            Err(ScaffoldError::DuplicateLiteral(_))
        ));
    }

    #[test]
    fn lazy_init_validations() {
        assert!(matches!(
            render_lazy_init(&[]),
            Err(ScaffoldError::EmptyEntries)
        ));
        let duplicate = vec![
            ("a".to_string(), "._c".to_string(), "a".to_string()),
            ("a".to_string(), "._d".to_string(), "a".to_string()),
        ];
        assert!(matches!(
            render_lazy_init(&duplicate),
            Err(ScaffoldError::DuplicateName(_))
        ));
    }

    #[test]
    fn snake_case_handles_camel_and_acronyms() {
        assert_eq!(snake_case("Widget"), "widget");
        assert_eq!(snake_case("DataProcessor"), "data_processor");
        assert_eq!(snake_case("HTTPPool"), "http_pool");
        assert_eq!(snake_case("Messenger2"), "messenger2");
    }
}
