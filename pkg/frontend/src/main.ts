import type { CriterionToken, MeasureToken, Snapshot } from "./protocol";
import { DualView } from "./scene";
import { SocketTransport } from "./transport";
import { ViewModel, type RenderSink } from "./viewmodel";

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

function banner(text: string, kind: "info" | "error" = "info") {
  const el = $("banner");
  el.textContent = text;
  el.className = kind;
  el.style.display = text ? "block" : "none";
}

async function createSession(): Promise<string> {
  const path = ($("data-path") as HTMLInputElement).value.trim();
  const pdbText = ($("pdb-text") as HTMLTextAreaElement).value.trim();
  const body: Record<string, unknown> = {
    config: {
      criterion: ($("criterion") as HTMLSelectElement).value,
      cutoff: parseFloat(($("cutoff") as HTMLInputElement).value),
    },
    measure: ($("measure") as HTMLSelectElement).value,
  };
  if (pdbText) body.pdb_text = pdbText;
  else if (path) body.path = path;
  else throw new Error("provide a server-side path or paste PDB text");
  const resp = await fetch("/sessions", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!resp.ok) {
    const detail = await resp.text();
    throw new Error(`session creation failed: ${detail}`);
  }
  return (await resp.json()).session_id;
}

function attach(sessionId: string) {
  $("setup").style.display = "none";
  $("workspace").style.display = "grid";

  const view = new DualView(
    $("left-canvas") as HTMLCanvasElement,
    $("right-canvas") as HTMLCanvasElement,
  );

  const sink: RenderSink = {
    render(snapshot: Snapshot) {
      view.render(snapshot);
      syncControls(snapshot);
    },
    showError(message: string) {
      banner(message, "error");
    },
  };

  const proto = location.protocol === "https:" ? "wss" : "ws";
  const transport = new SocketTransport(
    `${proto}://${location.host}/sessions/${sessionId}/ws`,
  );
  const vm = new ViewModel(transport, sink);
  transport.onMessage = (msg) => vm.onMessage(msg);
  transport.onReconnect = () => {
    banner("reconnected; refreshing", "info");
    vm.onReconnect();
  };
  transport.onStatus = (ok) => {
    if (!ok) banner("connection lost; showing last snapshot", "error");
  };

  const frame = $("frame") as HTMLInputElement;
  const cutoff = $("cutoff-slider") as HTMLInputElement;
  const measure = $("measure-select") as HTMLSelectElement;
  const criterion = $("criterion-select") as HTMLSelectElement;
  const autoBox = $("auto") as HTMLInputElement;
  const deltaBox = $("delta") as HTMLInputElement;

  frame.oninput = () =>
    vm.changeParam({ type: "set_frame", value: parseInt(frame.value, 10) });
  cutoff.oninput = () =>
    vm.changeParam({ type: "set_cutoff", value: parseFloat(cutoff.value) });
  measure.onchange = () =>
    vm.changeParam({ type: "set_measure", value: measure.value as MeasureToken });
  criterion.onchange = () =>
    vm.changeParam(
      { type: "set_criterion", value: criterion.value as CriterionToken },
      { debounce: false },
    );
  autoBox.onchange = () => vm.toggleAuto(autoBox.checked);
  deltaBox.onchange = () => vm.toggleDelta(deltaBox.checked);
  ($("recompute") as HTMLButtonElement).onclick = () => vm.recompute();

  vm.onStateChange = () => {
    $("recompute").toggleAttribute("disabled", vm.auto && !vm.stale);
    $("stale-badge").style.display = vm.stale ? "inline" : "none";
    if (vm.lastLatencyMs !== null) {
      $("latency").textContent = `client loop ${vm.lastLatencyMs.toFixed(0)} ms`;
    }
  };

  let synced = false;
  function syncControls(snapshot: Snapshot) {
    const s = snapshot.state;
    $("counts").textContent =
      `${snapshot.nodes.length} residues, ${snapshot.edges.length} contacts`;
    $("timing").textContent =
      `server: edges ${s ? snapshot.timing.edge_update_ms.toFixed(1) : 0} ms | ` +
      `layout ${snapshot.timing.layout_ms.toFixed(1)} ms | ` +
      `measure ${snapshot.timing.measure_ms.toFixed(1)} ms | ` +
      `total ${snapshot.timing.total_ms.toFixed(1)} ms`;
    ($("frame-label") as HTMLElement).textContent = `frame ${s.frame}/${s.frame_count - 1}`;
    ($("cutoff-label") as HTMLElement).textContent = `cutoff ${s.cutoff.toFixed(1)} Å`;
    if (!synced) {
      frame.max = String(s.frame_count - 1);
      frame.value = String(s.frame);
      cutoff.min = String(s.cutoff_min);
      cutoff.max = String(s.cutoff_max);
      cutoff.step = String(s.cutoff_step);
      cutoff.value = String(s.cutoff);
      for (const token of s.measures) {
        const opt = document.createElement("option");
        opt.value = token;
        opt.textContent = token;
        measure.append(opt);
      }
      measure.value = s.measure;
      for (const token of s.criteria) {
        const opt = document.createElement("option");
        opt.value = token;
        opt.textContent = token;
        criterion.append(opt);
      }
      criterion.value = s.criterion;
      synced = true;
    }
    autoBox.checked = s.auto_recompute;
    deltaBox.checked = s.delta_view;
  }

  vm.refresh();
}

$("connect").onclick = async () => {
  try {
    banner("");
    const sessionId = await createSession();
    history.replaceState(null, "", `?session=${sessionId}`);
    attach(sessionId);
  } catch (err) {
    banner(String(err), "error");
  }
};

const existing = new URLSearchParams(location.search).get("session");
if (existing) attach(existing);
