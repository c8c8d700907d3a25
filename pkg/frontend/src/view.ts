/**
 * DOM rendering. The view is rebuilt from scratch on every state change;
 * at configurator scale that is simpler and fast enough.
 */

import type { FeatureEntry, RepairOption } from './api.js';
import { badgeText, featureState, UiSessionState } from './state.js';

export interface Handlers {
    onToggle(feature: string, value: 0 | 1): void;
    onApplyRepair(option: RepairOption): void;
    onDismissRepairs(): void;
    onRetry(): void;
    onComplete(): void;
}

export function render(
    root: HTMLElement,
    features: FeatureEntry[],
    state: UiSessionState,
    handlers: Handlers,
): void {
    root.textContent = '';
    root.appendChild(statusBar(state, handlers));
    if (state.error !== null) {
        root.appendChild(errorBanner(state.error, handlers));
    }
    root.appendChild(featureTree(features, state, handlers));
    if (state.repairs !== null) {
        root.appendChild(repairDialog(state.repairs, handlers));
    }
}

function statusBar(state: UiSessionState, handlers: Handlers): HTMLElement {
    const bar = el('div', 'status-bar');
    const status = el('span', `status status-${state.status}`);
    status.textContent = `session ${state.sessionId ?? '...'} - ${state.status}`;
    bar.appendChild(status);
    const complete = el('button', 'complete-button') as HTMLButtonElement;
    complete.textContent = 'complete session';
    complete.disabled = state.status !== 'open' || state.busy;
    complete.addEventListener('click', () => handlers.onComplete());
    bar.appendChild(complete);
    return bar;
}

function errorBanner(message: string, handlers: Handlers): HTMLElement {
    const banner = el('div', 'error-banner');
    const text = el('span', 'error-text');
    text.textContent = message;
    banner.appendChild(text);
    const retry = el('button', 'retry-button');
    retry.textContent = 'retry';
    retry.addEventListener('click', () => handlers.onRetry());
    banner.appendChild(retry);
    return banner;
}

function featureTree(features: FeatureEntry[], state: UiSessionState, handlers: Handlers): HTMLElement {
    const list = el('ul', 'feature-tree');
    for (const feature of features) {
        list.appendChild(featureRow(feature, state, handlers));
    }
    return list;
}

function featureRow(feature: FeatureEntry, state: UiSessionState, handlers: Handlers): HTMLElement {
    const current = featureState(state, feature.id);
    const row = el('li', `feature-row state-${current}`);
    row.dataset.feature = feature.id;
    row.style.paddingLeft = `${feature.depth}em`;
    if (state.nextFeature === feature.id) {
        row.classList.add('next-question');
    }

    const label = el('span', 'feature-name');
    label.textContent = feature.name;
    if (feature.group !== null) {
        label.textContent += ` (${feature.group.kind})`;
    } else if (feature.rel === 'mandatory') {
        label.textContent += ' (mandatory)';
    }
    row.appendChild(label);

    if (current === 'forced') {
        const forced = el('span', 'forced-value');
        forced.textContent = state.forced[feature.id] === 1 ? 'included' : 'excluded';
        forced.title = 'derived from the model constraints; not editable';
        row.appendChild(forced);
    } else {
        row.appendChild(toggleButton(feature.id, 1, current === 'selected', state, handlers));
        row.appendChild(toggleButton(feature.id, 0, current === 'deselected', state, handlers));
    }

    const recommendation = state.badges[feature.id];
    if (recommendation !== undefined && current === 'unset') {
        const badge = el('span', 'badge');
        badge.textContent = badgeText(recommendation);
        badge.title = `neighbors: ${recommendation.neighbors.join(', ')}`;
        row.appendChild(badge);
    }
    if (state.nextFeature === feature.id) {
        const hint = el('span', 'next-hint');
        hint.textContent = 'suggested next question';
        row.appendChild(hint);
    }
    return row;
}

function toggleButton(
    feature: string,
    value: 0 | 1,
    active: boolean,
    state: UiSessionState,
    handlers: Handlers,
): HTMLElement {
    const button = el('button', value === 1 ? 'include-button' : 'exclude-button') as HTMLButtonElement;
    button.textContent = value === 1 ? 'include' : 'exclude';
    if (active) {
        button.classList.add('active');
    }
    button.disabled = state.status === 'completed' || state.busy;
    button.addEventListener('click', () => handlers.onToggle(feature, value));
    return button;
}

function repairDialog(repairs: RepairOption[], handlers: Handlers): HTMLElement {
    const dialog = el('div', 'repair-dialog');
    const heading = el('p', 'repair-heading');
    heading.textContent = 'Your choices conflict with the model. Pick a way to restore consistency:';
    dialog.appendChild(heading);
    const list = el('ol', 'repair-list');
    for (const option of repairs) {
        const item = el('li', 'repair-option');
        const summary = el('span', 'repair-changes');
        summary.textContent = Object.entries(option.changes)
            .map(([feature, value]) => `${feature} -> ${value === 1 ? 'include' : 'exclude'}`)
            .join(', ');
        item.appendChild(summary);
        if (option.utility !== null) {
            const utility = el('span', 'repair-utility');
            utility.textContent = ` (utility ${option.utility.toFixed(2)})`;
            item.appendChild(utility);
        }
        const apply = el('button', 'apply-repair');
        apply.textContent = 'apply';
        apply.addEventListener('click', () => handlers.onApplyRepair(option));
        item.appendChild(apply);
        list.appendChild(item);
    }
    dialog.appendChild(list);
    const dismiss = el('button', 'dismiss-repairs');
    dismiss.textContent = 'keep editing';
    dismiss.addEventListener('click', () => handlers.onDismissRepairs());
    dialog.appendChild(dismiss);
    return dialog;
}

function el(tag: string, className: string): HTMLElement {
    const node = document.createElement(tag);
    node.className = className;
    return node;
}
