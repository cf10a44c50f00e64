/**
 * Game state controller: holds the per-level UI state, runs the local checks
 * and only talks to the server when they pass. At most one proposal is in
 * flight at a time; the propose button is enabled exactly when the current
 * text parses and every trace row is green.
 */

import { FeedbackJson, GameApi, LevelDetail, ProposeResponse, TraceJson } from "./api.js";
import { Row } from "./evaluate.js";
import { CheckResult, RowColor, localChecks, rowColors, tryParse } from "./localChecks.js";
import { valueFromWire } from "./rational.js";

export interface UiLevelState {
  level: LevelDetail;
  trace: TraceJson | null;
  rows: Row[];
  inductive: string[];
  potential: string[];
  feedback: FeedbackJson | null;
  score: number;
  solved: boolean;
  history: string[];
  pending: boolean;
}

export type Listener = (state: UiLevelState) => void;

export function rowsFromTrace(trace: TraceJson): Row[] {
  return trace.rows.map((row) => {
    const out: Row = {};
    for (const [name, raw] of Object.entries(row.values)) {
      out[name] = valueFromWire(raw);
    }
    return out;
  });
}

export class LevelController {
  state: UiLevelState;
  private listeners: Listener[] = [];

  constructor(
    private api: GameApi,
    private session: string,
    level: LevelDetail,
  ) {
    this.state = {
      level,
      trace: null,
      rows: [],
      inductive: [],
      potential: [],
      feedback: null,
      score: 0,
      solved: false,
      history: [],
      pending: false,
    };
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  get variables(): Set<string> {
    return new Set(Object.keys(this.state.level.variables));
  }

  colorsFor(text: string): RowColor[] {
    return rowColors(text, this.state.rows, this.variables);
  }

  /** The red + button is clickable only when this returns true. */
  canPropose(text: string): boolean {
    if (this.state.pending || tryParse(text, this.variables) === null) {
      return false;
    }
    return this.colorsFor(text).every((color) => color === "green");
  }

  checkLocally(text: string): CheckResult {
    return localChecks(text, this.state.history, this.state.rows, this.variables);
  }

  async loadTrace(inputs: Record<string, string>): Promise<void> {
    const trace = await this.api.trace(this.session, this.state.level.id, inputs);
    this.state.trace = trace;
    this.state.rows = rowsFromTrace(trace);
    this.emit();
  }

  async refreshState(): Promise<void> {
    const remote = await this.api.getState(this.session, this.state.level.id);
    this.state.inductive = remote.inductive;
    this.state.potential = remote.potential;
    this.state.score = remote.score;
    this.state.solved = remote.solved;
    this.state.history = remote.history.map((h) => h.expr);
    this.emit();
  }

  /**
   * Local checks first: rejected expressions never reach the network.
   * Returns the rejection, or the server response.
   */
  async propose(text: string): Promise<CheckResult | ProposeResponse> {
    const check = this.checkLocally(text);
    if (!check.ok) {
      return check;
    }
    if (this.state.pending) {
      return { ok: false, reason: "duplicate", detail: "a proposal is already in flight" };
    }
    this.state.pending = true;
    this.emit();
    try {
      const response = await this.api.propose(this.session, this.state.level.id, text);
      this.state.history.push(text);
      this.state.inductive = response.inductive;
      this.state.potential = response.potential;
      this.state.feedback = response.feedback;
      this.state.score = response.score;
      this.state.solved = response.solved;
      return response;
    } finally {
      this.state.pending = false;
      this.emit();
    }
  }

  async whyNot(text: string) {
    return this.api.whyNot(this.session, this.state.level.id, text);
  }
}
