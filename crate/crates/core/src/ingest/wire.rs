//! JSON shapes of the facts format. Field names here are the wire contract.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProjectRecord {
    pub id: String,
    pub stars: u64,
    pub commits: u64,
    pub first_commit: String,
    pub last_commit: String,
    pub dup_ratio: f64,
    pub in_index: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ModuleRecord {
    pub id: String,
    pub project: String,
    pub group: String,
    pub artifact: String,
    pub version: String,
    pub platform: String,
    pub scala_version: String,
    pub loc_main: u64,
    pub loc_test: u64,
    pub total_call_sites: u64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub test_call_sites: u64,
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeRefJson {
    pub head: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<TypeRefJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamJson {
    pub name: String,
    pub tpe: TypeRefJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamListJson {
    #[serde(default)]
    pub implicit: bool,
    pub params: Vec<ParamJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "sig", rename_all = "lowercase", deny_unknown_fields)]
pub enum SignatureJson {
    #[serde(rename_all = "camelCase")]
    Method {
        #[serde(default)]
        type_params: Vec<String>,
        #[serde(default)]
        param_lists: Vec<ParamListJson>,
        ret: TypeRefJson,
    },
    Value {
        tpe: TypeRefJson,
    },
    #[serde(rename_all = "camelCase")]
    Type {
        #[serde(default)]
        type_params: Vec<String>,
        #[serde(default)]
        parents: Vec<TypeRefJson>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        ctor: Vec<ParamListJson>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DeclarationRecord {
    pub id: String,
    pub module: String,
    pub decl_kind: String,
    pub language: String,
    pub implicit: bool,
    pub visibility: String,
    pub scope: String,
    pub path: String,
    pub range: [u32; 4],
    #[serde(default)]
    pub from_implicit_class: bool,
    pub signature: SignatureJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_kind: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArgTreeJson {
    Ref {
        #[serde(rename = "ref")]
        id: String,
    },
    #[serde(rename_all = "camelCase")]
    Call {
        call: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        type_args: Vec<TypeRefJson>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        args: Vec<ArgTreeJson>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CallsiteRecord {
    pub module: String,
    pub callee: String,
    pub path: String,
    pub range: [u32; 4],
    #[serde(default)]
    pub type_args: Vec<TypeRefJson>,
    #[serde(default)]
    pub implicit_args: Vec<ArgTreeJson>,
    #[serde(default)]
    pub synthetic_call: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_kind: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase", deny_unknown_fields)]
pub enum TreeJson {
    Original {
        range: [u32; 4],
        /// Symbol the quoted source resolves to, when the producer knows it.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symbol: Option<String>,
    },
    Idref {
        symbol: String,
    },
    Select {
        qual: Box<TreeJson>,
        id: Box<TreeJson>,
    },
    #[serde(rename_all = "camelCase")]
    Typeapply {
        #[serde(rename = "fn")]
        fun: Box<TreeJson>,
        type_args: Vec<TypeRefJson>,
    },
    Apply {
        #[serde(rename = "fn")]
        fun: Box<TreeJson>,
        args: Vec<TreeJson>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SyntheticRecord {
    pub module: String,
    pub path: String,
    pub tree: TreeJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_kind: Option<String>,
}
