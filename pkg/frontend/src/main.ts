import { ApiClient } from "./api.js";
import { Player } from "./audio.js";
import { keyAction } from "./keyboard.js";
import { SessionState } from "./state.js";
import { Label, SegmentCard } from "./types.js";
import { drawWaveform, timeTicks } from "./waveform.js";

const api = new ApiClient();
const player = new Player();

let state = new SessionState([]);
let raterPinned = false;
let raterLocked = false;

interface CardView {
  root: HTMLElement;
  badge: HTMLElement;
  note: HTMLElement;
}
let views: CardView[] = [];

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
};

// --- banner ---------------------------------------------------------------

function showBanner(message: string, retry?: () => void): void {
  const banner = $("banner");
  banner.textContent = "";
  banner.append(message);
  if (retry) {
    const btn = document.createElement("button");
    btn.textContent = "Retry";
    btn.addEventListener("click", () => {
      hideBanner();
      retry();
    });
    banner.append(" ", btn);
  }
  const dismiss = document.createElement("button");
  dismiss.textContent = "Dismiss";
  dismiss.addEventListener("click", hideBanner);
  banner.append(" ", dismiss);
  banner.hidden = false;
}

function hideBanner(): void {
  $("banner").hidden = true;
}

// --- rendering ------------------------------------------------------------

function updateProgress(): void {
  $("progress").textContent = state.progressText();
  $("progress").classList.toggle("done", state.complete());
}

function badgeText(label: Label | null): string {
  if (label === null) return "unlabeled";
  return label === 1 ? "single cough" : "not single";
}

function updateCardView(index: number): void {
  const card = state.card(index);
  const view = views[index];
  view.badge.textContent = badgeText(card.label);
  view.badge.className = `badge label-${card.label === null ? "none" : card.label}`;
  view.root.classList.toggle("labeled", card.label !== null);
}

function focusCard(index: number): void {
  state.setFocus(index);
  views.forEach((v, i) => v.root.classList.toggle("focused", i === state.focusedIndex()));
  const view = views[state.focusedIndex()];
  if (view) view.root.scrollIntoView({ block: "nearest" });
}

function renderAxis(container: HTMLElement, durationMs: number): void {
  for (const tick of timeTicks(durationMs)) {
    const span = document.createElement("span");
    span.className = "tick";
    span.style.left = `${tick.frac * 100}%`;
    span.textContent = tick.label;
    container.append(span);
  }
}

function playCard(index: number): void {
  const card = state.card(index);
  const view = views[index];
  view.note.textContent = "";
  player.play(api.audioUrl(card.segment_file), (message) => {
    view.note.textContent = `playback failed: ${message} — press space to retry`;
  });
}

function buildCard(card: SegmentCard, index: number): CardView {
  const root = document.createElement("section");
  root.className = "card";

  const head = document.createElement("header");
  const name = document.createElement("span");
  name.className = "name";
  name.textContent = `${String(index + 1).padStart(3, "0")}  ${card.segment_file}`;
  const duration = document.createElement("span");
  duration.className = "duration";
  duration.textContent = `${Math.round(card.duration_ms)} ms`;
  const badge = document.createElement("span");
  head.append(name, duration, badge);

  const canvas = document.createElement("canvas");
  canvas.width = 640;
  canvas.height = 96;
  const ctx = canvas.getContext("2d");
  if (ctx) drawWaveform(ctx, card.peaks, canvas.width, canvas.height);

  const axis = document.createElement("div");
  axis.className = "axis";
  renderAxis(axis, card.duration_ms);

  const controls = document.createElement("div");
  controls.className = "controls";
  const play = document.createElement("button");
  play.textContent = "▶ play";
  play.addEventListener("click", () => {
    focusCard(index);
    playCard(index);
  });
  const no = document.createElement("button");
  no.textContent = "0 — not single";
  no.addEventListener("click", () => submitLabel(index, 0));
  const yes = document.createElement("button");
  yes.textContent = "1 — single cough";
  yes.addEventListener("click", () => submitLabel(index, 1));
  const note = document.createElement("span");
  note.className = "note";
  controls.append(play, no, yes, note);

  root.append(head, canvas, axis, controls);
  root.addEventListener("click", () => focusCard(index));

  return { root, badge, note };
}

function renderCards(): void {
  const list = $("cards");
  list.textContent = "";
  views = state.all().map((card, i) => buildCard(card, i));
  views.forEach((v, i) => {
    list.append(v.root);
    updateCardView(i);
  });
  updateProgress();
  if (views.length > 0) focusCard(0);
}

// --- labeling -------------------------------------------------------------

function currentRater(): string {
  return ($("rater") as HTMLInputElement).value.trim();
}

async function submitLabel(index: number, value: Label): Promise<void> {
  const rater = currentRater();
  if (!rater) {
    $("rater").focus();
    showBanner("Enter your rater id before labeling.");
    return;
  }
  const card = state.card(index);
  try {
    await api.submitLabel(card.segment_file, rater, value);
  } catch (err) {
    // the card stays as the server knows it; nothing is lost silently
    const message = err instanceof Error ? err.message : String(err);
    showBanner(`Label was not saved (${message}).`, () => void submitLabel(index, value));
    return;
  }
  if (!raterLocked && !raterPinned) {
    raterLocked = true; // one rater per browser session from here on
    const input = $("rater") as HTMLInputElement;
    input.disabled = true;
    input.title = "rater id is fixed for this session; reload the page to switch";
  }
  state.applyLabel(card.segment_file, value);
  updateCardView(index);
  updateProgress();
  focusCard(state.nextAfter(index));
}

// --- boot -----------------------------------------------------------------

async function loadCards(raterId: string | null): Promise<void> {
  const cards = await api.segments(raterId);
  state = new SessionState(cards);
  renderCards();
}

function wireRaterInput(): void {
  const input = $("rater") as HTMLInputElement;
  const reload = () => {
    if (raterPinned || raterLocked) return;
    const rater = currentRater();
    if (!rater) return;
    loadCards(rater).catch((err) =>
      showBanner(`Could not load segments (${String(err)}).`, () => void loadCards(rater)),
    );
  };
  input.addEventListener("change", reload);
  input.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") {
      input.blur();
    }
  });
}

function wireKeyboard(): void {
  document.addEventListener("keydown", (ev) => {
    const tag = ev.target instanceof Element ? ev.target.tagName : "";
    const action = keyAction(ev.key, tag);
    if (!action || state.size === 0) return;
    ev.preventDefault();
    const index = state.focusedIndex();
    if (action.kind === "label") {
      void submitLabel(index, action.value);
    } else if (action.kind === "replay") {
      playCard(index);
    } else {
      focusCard(index + action.delta);
    }
  });
}

async function boot(): Promise<void> {
  try {
    const session = await api.session();
    const input = $("rater") as HTMLInputElement;
    if (session.rater_id) {
      raterPinned = true;
      input.value = session.rater_id;
      input.disabled = true;
    }
    ($("export") as HTMLAnchorElement).href = api.exportUrl();
    await loadCards(session.rater_id);
    if (!session.rater_id) input.focus();
  } catch (err) {
    showBanner(
      `Annotation server unreachable (${err instanceof Error ? err.message : String(err)}).`,
      () => void boot(),
    );
  }
}

wireRaterInput();
wireKeyboard();
void boot();
