import { GameApi } from "./api.js";
import { LevelController } from "./gameState.js";
import { GameView } from "./ui.js";

const SESSION_KEY = "sipgame-session";

async function ensureSession(api: GameApi): Promise<string> {
  const existing = window.localStorage.getItem(SESSION_KEY);
  if (existing) {
    return existing;
  }
  const fresh = await api.createSession();
  window.localStorage.setItem(SESSION_KEY, fresh);
  return fresh;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  const api = new GameApi("");
  const session = await ensureSession(api);
  const levels = await api.listLevels();
  const picker = document.getElementById("level-picker") as HTMLSelectElement;
  const tutorialFirst = [...levels].sort(
    (a, b) => Number(b.tutorial) - Number(a.tutorial),
  );
  for (const level of tutorialFirst) {
    const option = document.createElement("option");
    option.value = level.id;
    option.textContent = level.tutorial ? `${level.title} (tutorial)` : level.title;
    picker.appendChild(option);
  }

  let glossary: Record<string, string> = {};
  try {
    const response = await fetch("glossary.json");
    if (response.ok) {
      glossary = await response.json();
    }
  } catch {
    // hover help is optional
  }

  const open = async (levelId: string) => {
    const detail = await api.getLevel(levelId);
    const controller = new LevelController(api, session, detail);
    const view = new GameView(root, controller);
    view.setGlossary(glossary);
    view.render();
    await controller.refreshState();
    const starter: Record<string, string> = {};
    for (const [name, raw] of Object.entries(detail.starterInputs)) {
      starter[name] = String(raw);
    }
    if (Object.keys(starter).length) {
      await controller.loadTrace(starter);
    }
  };

  picker.addEventListener("change", () => {
    open(picker.value).catch((err) => console.error(err));
  });
  await open(tutorialFirst[0].id);
}

boot().catch((err) => {
  const root = document.getElementById("app");
  if (root) {
    root.textContent = `failed to start: ${err}`;
  }
});
