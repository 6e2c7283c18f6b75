/**
 * Typed access to the JSON fixtures captured from the real service by
 * capture_fixtures.py. The casts are the single place where the raw
 * JSON meets the wire types.
 */

import type {
  ConditionLine,
  MatrixPayload,
  Meta,
  PmiPayload,
  SelectionResponse,
  ViolinPayload,
} from "../src/types.js";

import metaJson from "./fixtures/meta.json";
import violinsJson from "./fixtures/violins.json";
import matrixJson from "./fixtures/matrix.json";
import selectionModeJson from "./fixtures/selection_mode.json";
import selectionAllJson from "./fixtures/selection_all.json";
import selectionEmptyJson from "./fixtures/selection_empty.json";
import pmiJson from "./fixtures/pmi.json";
import conditionJson from "./fixtures/condition.json";
import truthJson from "./fixtures/truth.json";

export interface Truth {
  generator_seed: number;
  session_seed: number;
  bandwidth: number;
  label: string;
  component: number;
  scene_ids: number[];
  brush: { lo: number; hi: number };
  anchor: { label: string; scene: number };
}

export interface ConditionFixture {
  label: string;
  scene: number;
  ndjson: string;
  lines: ConditionLine[];
}

export const fixtures = {
  meta: metaJson as unknown as Meta,
  violins: violinsJson as unknown as Record<string, ViolinPayload>,
  matrix: matrixJson as unknown as Record<string, Record<string, MatrixPayload>>,
  selections: {
    mode: selectionModeJson as unknown as SelectionResponse,
    all: selectionAllJson as unknown as SelectionResponse,
    empty: selectionEmptyJson as unknown as SelectionResponse,
  },
  pmi: pmiJson as unknown as PmiPayload,
  condition: conditionJson as unknown as ConditionFixture,
  truth: truthJson as unknown as Truth,
};
