/** DOM wiring: trace table, expression box, invariant panels, feedback. */

import { StateJson } from "./api.js";
import { LevelController } from "./gameState.js";
import { valueFromWire, valueToDisplay } from "./rational.js";

type Glossary = Record<string, string>;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderStateTable(state: StateJson, variables: string[]): HTMLElement {
  const table = el("table", "state-table");
  const head = el("tr");
  const body = el("tr");
  for (const name of variables) {
    head.appendChild(el("th", undefined, name));
    const raw = state.values[name];
    body.appendChild(el("td", undefined, valueToDisplay(valueFromWire(raw))));
  }
  table.appendChild(head);
  table.appendChild(body);
  return table;
}

export class GameView {
  private glossary: Glossary = {};
  private expressionBox!: HTMLInputElement;
  private proposeButton!: HTMLButtonElement;
  private messages!: HTMLElement;

  constructor(
    private root: HTMLElement,
    private controller: LevelController,
  ) {}

  setGlossary(glossary: Glossary): void {
    this.glossary = glossary;
  }

  private term(word: string): HTMLElement {
    const span = el("span", "term", word);
    if (this.glossary[word]) {
      span.title = this.glossary[word];
    }
    return span;
  }

  render(): void {
    const { level } = this.controller.state;
    this.root.innerHTML = "";

    const header = el("div", "header");
    header.appendChild(el("h1", undefined, level.title));
    const score = el("span", "score", "score: 0");
    header.appendChild(score);
    this.root.appendChild(header);

    const banner = el("div", "solved-banner");
    banner.style.display = "none";
    banner.textContent = "Solved! The guarantee is proved.";
    this.root.appendChild(banner);

    const columns = el("div", "columns");
    this.root.appendChild(columns);

    // program and guarantee
    const programPane = el("div", "pane program-pane");
    programPane.appendChild(el("h2", undefined, "Program"));
    const pre = el("pre", "source", level.source);
    programPane.appendChild(pre);
    const guarantee = el("div", "guarantee");
    guarantee.appendChild(this.term("guarantee"));
    guarantee.appendChild(el("code", undefined, ` ${level.guarantee}`));
    programPane.appendChild(guarantee);
    columns.appendChild(programPane);

    // trace
    const tracePane = el("div", "pane trace-pane");
    tracePane.appendChild(el("h2", undefined, "Trace"));
    const traceForm = el("div", "trace-form");
    const inputs: Record<string, HTMLInputElement> = {};
    for (const name of level.parameters) {
      const label = el("label", undefined, `${name} = `);
      const box = el("input");
      box.value = String(level.starterInputs[name] ?? "");
      inputs[name] = box;
      label.appendChild(box);
      traceForm.appendChild(label);
    }
    const traceButton = el("button", undefined, "generate trace");
    traceButton.addEventListener("click", () => {
      const values: Record<string, string> = {};
      for (const [name, box] of Object.entries(inputs)) {
        values[name] = box.value;
      }
      this.controller.loadTrace(values).catch((err) => this.say(String(err)));
    });
    traceForm.appendChild(traceButton);
    tracePane.appendChild(traceForm);
    const traceTable = el("div", "trace-table");
    tracePane.appendChild(traceTable);
    columns.appendChild(tracePane);

    // proposals
    const proposePane = el("div", "pane propose-pane");
    proposePane.appendChild(el("h2", undefined, "Propose an invariant"));
    this.expressionBox = el("input", "expression-box");
    this.expressionBox.placeholder = "e.g. odd % 2 = 1";
    this.proposeButton = el("button", "propose-button", "+");
    this.proposeButton.disabled = true;
    proposePane.appendChild(this.expressionBox);
    proposePane.appendChild(this.proposeButton);
    this.messages = el("div", "messages");
    proposePane.appendChild(this.messages);

    const inductivePanel = el("div", "panel");
    const indTitle = el("h3");
    indTitle.appendChild(this.term("inductive"));
    indTitle.appendChild(document.createTextNode(" invariants"));
    inductivePanel.appendChild(indTitle);
    const inductiveList = el("ul", "inductive-list");
    inductivePanel.appendChild(inductiveList);

    const potentialPanel = el("div", "panel");
    const potTitle = el("h3");
    potTitle.appendChild(this.term("potential"));
    potTitle.appendChild(document.createTextNode(" invariants"));
    potentialPanel.appendChild(potTitle);
    const potentialList = el("ul", "potential-list");
    potentialPanel.appendChild(potentialList);

    proposePane.appendChild(inductivePanel);
    proposePane.appendChild(potentialPanel);
    const feedbackPane = el("div", "feedback");
    proposePane.appendChild(feedbackPane);
    columns.appendChild(proposePane);

    const variableNames = Object.keys(level.variables);

    const redraw = () => {
      const state = this.controller.state;
      score.textContent = `score: ${state.score}`;
      banner.style.display = state.solved ? "block" : "none";

      traceTable.innerHTML = "";
      if (state.trace) {
        const table = el("table");
        const head = el("tr");
        head.appendChild(el("th", undefined, "#"));
        for (const name of variableNames) head.appendChild(el("th", undefined, name));
        table.appendChild(head);
        const colors = this.controller.colorsFor(this.expressionBox.value);
        state.trace.rows.forEach((row, index) => {
          const tr = el("tr", colors[index] ?? "neutral");
          tr.appendChild(el("td", undefined, String(row.iteration)));
          for (const name of variableNames) {
            tr.appendChild(
              el("td", undefined, valueToDisplay(valueFromWire(row.values[name]))),
            );
          }
          table.appendChild(tr);
        });
        traceTable.appendChild(table);
      }

      inductiveList.innerHTML = "";
      for (const text of state.inductive) {
        inductiveList.appendChild(el("li", undefined, text));
      }
      potentialList.innerHTML = "";
      for (const text of state.potential) {
        const item = el("li", undefined, `${text} `);
        const why = el("button", "why-button", "?");
        why.addEventListener("click", () => {
          this.controller
            .whyNot(text)
            .then((pair) => {
              feedbackPane.innerHTML = "";
              feedbackPane.appendChild(el("h3", undefined, "why is this only potential?"));
              feedbackPane.appendChild(el("div", undefined, "a state satisfying everything known:"));
              feedbackPane.appendChild(renderStateTable(pair.before, variableNames));
              feedbackPane.appendChild(el("div", undefined, "after one loop body execution:"));
              feedbackPane.appendChild(renderStateTable(pair.after, variableNames));
            })
            .catch((err) => this.say(String(err)));
        });
        item.appendChild(why);
        potentialList.appendChild(item);
      }

      const feedback = state.feedback;
      if (feedback) {
        feedbackPane.innerHTML = "";
        if (feedback.solved) {
          feedbackPane.appendChild(el("div", "congrats", "Level solved - congratulations!"));
        } else if (feedback.ruleOutState) {
          const blurb = el("div");
          blurb.appendChild(document.createTextNode("Propose an invariant that rules out this "));
          blurb.appendChild(this.term("state"));
          blurb.appendChild(document.createTextNode(":"));
          feedbackPane.appendChild(blurb);
          feedbackPane.appendChild(renderStateTable(feedback.ruleOutState, variableNames));
        } else if (feedback.diagnostic) {
          feedbackPane.appendChild(el("div", undefined, feedback.diagnostic));
        }
        if (feedback.promotedInvariants.length) {
          feedbackPane.appendChild(
            el("div", undefined, `promoted: ${feedback.promotedInvariants.join(", ")}`),
          );
        }
        if (feedback.removedInvariants.length) {
          feedbackPane.appendChild(
            el("div", undefined, `now redundant, removed: ${feedback.removedInvariants.join(", ")}`),
          );
        }
      }

      this.proposeButton.disabled = !this.controller.canPropose(this.expressionBox.value);
    };

    this.controller.onChange(redraw);
    this.expressionBox.addEventListener("input", redraw);
    this.proposeButton.addEventListener("click", () => {
      const text = this.expressionBox.value;
      this.controller
        .propose(text)
        .then((result) => {
          if ("ok" in result && !result.ok) {
            this.say(`${result.reason}: ${result.detail}`);
          } else {
            this.say(`characterized as ${(result as { kind: string }).kind}`);
            this.expressionBox.value = "";
          }
          redraw();
        })
        .catch((err) => this.say(String(err)));
    });
    redraw();
  }

  private say(message: string): void {
    this.messages.textContent = message;
  }
}
