/**
 * App wiring: file input, control panel, and re-rendering on state change.
 * All logic lives in state.ts/render.ts; this file only connects DOM events
 * to state transitions.
 */

import { SchemaError } from './schema';
import {
  ExplorerState,
  SizingMode,
  ViewMode,
  communityIds,
  loadDocument,
  selectNode,
  setSizing,
  setTimeWindow,
  setView,
  showAllCommunities,
  toggleCommunity,
} from './state';
import { renderDetails, renderScene, renderTimeline } from './render';

let state: ExplorerState | null = null;

const $ = <T extends HTMLElement>(sel: string): T => {
  const el = document.querySelector<T>(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el;
};

function showError(message: string | null): void {
  const box = $('#error');
  box.hidden = message === null;
  box.textContent = message ?? '';
}

function update(next: ExplorerState): void {
  state = next;
  const summary = next.doc.summary;
  $('#summary').textContent =
    `${summary.node_count} nodes, ${summary.link_count} links, ` +
    `${summary.distinct_users} users, ${summary.unobserved_originals} unobserved originals, ` +
    `${summary.rejected_clock_skew} clock-skewed retweets rejected`;
  renderScene($('#scene'), next, {
    animate: true,
    onSelect: (id) => {
      if (state) update(selectNode(state, id));
    },
  });
  renderTimeline($('#timeline'), next);
  renderDetails($('#details'), next);
  renderCommunityChips(next);
}

function renderCommunityChips(current: ExplorerState): void {
  const box = $('#community-chips');
  box.textContent = '';
  for (const id of communityIds(current.doc)) {
    const chip = document.createElement('button');
    chip.type = 'button';
    chip.className = 'chip' + (current.visibleCommunities.has(id) ? '' : ' off');
    chip.textContent = id === null ? 'none' : `c${id}`;
    chip.addEventListener('click', () => {
      if (state) update(toggleCommunity(state, id));
    });
    box.appendChild(chip);
  }
}

$('#file-input').addEventListener('change', async (event) => {
  const input = event.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  try {
    const next = loadDocument(JSON.parse(await file.text()));
    showError(null);
    $('#controls').hidden = false;
    update(next);
  } catch (err) {
    if (err instanceof SchemaError || err instanceof SyntaxError) {
      showError(`could not load ${file.name}: ${err.message}`);
    } else {
      throw err;
    }
  } finally {
    input.value = '';
  }
});

document.querySelectorAll<HTMLInputElement>('input[name="view"]').forEach((radio) => {
  radio.addEventListener('change', () => {
    if (state && radio.checked) update(setView(state, radio.value as ViewMode));
  });
});

document.querySelectorAll<HTMLInputElement>('input[name="sizing"]').forEach((radio) => {
  radio.addEventListener('change', () => {
    if (state && radio.checked) update(setSizing(state, radio.value as SizingMode));
  });
});

$('#show-all').addEventListener('click', () => {
  if (state) update(showAllCommunities(state));
});

$('#window-apply').addEventListener('click', () => {
  if (!state) return;
  const lo = Number(($('#window-lo') as HTMLInputElement).value);
  const hi = Number(($('#window-hi') as HTMLInputElement).value);
  if (Number.isFinite(lo) && Number.isFinite(hi) && hi > 0) {
    update(setTimeWindow(state, { lo, hi }));
  }
});

$('#window-clear').addEventListener('click', () => {
  if (!state) return;
  ($('#window-lo') as HTMLInputElement).value = '';
  ($('#window-hi') as HTMLInputElement).value = '';
  update(setTimeWindow(state, null));
});
