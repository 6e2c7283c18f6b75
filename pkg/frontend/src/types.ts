/**
 * Wire format of the denscope session service. Every field the UI
 * renders comes from these payloads; the client adds nothing beyond
 * linear pixel scales and the diverging color ramp.
 */

export type Origin = "prompt" | "discovered";

export interface LabelMeta {
  name: string;
  origin: Origin;
  count: number;
}

export interface Meta {
  prompt: string;
  num_scenes: number;
  feature_dim: number;
  bandwidth: number;
  seed: number;
  labels: LabelMeta[];
}

/** One embedding run: 1D for violins, 2D for matrix cells. */
export interface EmbeddingJson {
  label: string;
  kind: string;
  dim: number;
  instance_ids: number[];
  coords: number[][];
  kl_density: number;
  kl_neighbor: number;
  iterations: number;
  seed: number;
}

/** Width profile of 1D coordinates on a fixed grid. Subset profiles
 * keep the full-set normalization, so their area is area_scale times
 * the base area and they superimpose directly. */
export interface ViolinProfile {
  grid: number[];
  widths: number[];
  area_scale: number;
}

export interface ViolinSubset {
  selection_id: number;
  members: number[];
  omitted: boolean;
  profile: ViolinProfile | null;
}

export interface ViolinPayload {
  label: string;
  embedding: EmbeddingJson;
  profile: ViolinProfile;
  subset: ViolinSubset | null;
}

/** Matrix cell payload; co_occur=false cells carry a message instead
 * of an embedding. */
export interface MatrixPayload {
  co_occur: boolean;
  labels: string[];
  embedding?: EmbeddingJson;
  message?: string;
}

export interface SelectionLabelEntry {
  label: string;
  members: number[];
  omitted: boolean;
  overlay: ViolinProfile | null;
}

export interface SelectionScene {
  scene_id: number;
  seed: number;
  image_ref: string | null;
}

export interface SelectionResponse {
  selection_id: number;
  scene_ids: number[];
  labels: SelectionLabelEntry[];
  scenes: SelectionScene[];
}

export interface SelectionState {
  selection_id: number | null;
  scene_ids: number[];
  anchor: { label: string; scene: number } | null;
}

export interface PmiEntry {
  label: string;
  instance_ids: number[];
  values: number[];
}

export interface PmiPayload {
  anchor: {
    label: string;
    scene: number;
    loc: number[] | null;
    image_ref: string | null;
  };
  entries: PmiEntry[];
  unavailable: string[];
  bound: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: Record<string, unknown> | null;
}

/** One NDJSON line of the condition stream: either a re-projected
 * embedding for a prompt label or an isolated per-label error. */
export type ConditionLine =
  | { label: string; ok: true; embedding: EmbeddingJson }
  | { label: string; ok: false; error: ApiErrorBody };

export interface Anchor {
  label: string;
  scene: number;
}
